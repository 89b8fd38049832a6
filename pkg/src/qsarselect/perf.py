"""Strategy-by-target performance store: aRMSEr scores, rankings, labels.

The matrix holds the 10-fold CV RMSE of every strategy on every target.
Cells may be missing (with a status reason); scoring and labeling follow
explicit missing-cell policies so partial corpora stay usable.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .stats import rankdata_average

__all__ = [
    "PerformanceMatrix",
    "RankingVector",
    "armser",
    "rank_strategies",
    "rank_matrix",
    "best_strategy_labels",
    "topk_strategies",
    "topk_labels",
]

RMSE_CLAMP = 1e-9
# strategies missing more than this fraction of targets are not scored
MAX_MISSING_FRACTION = 0.1


@dataclass(frozen=True)
class PerformanceMatrix:
    """Frozen (targets x strategies) RMSE matrix with per-cell status."""

    target_ids: tuple
    strategy_ids: tuple
    rmse: np.ndarray        # (n, m), NaN where missing
    fold_rmse: np.ndarray   # (n, m, n_folds), NaN where missing
    status: tuple           # tuple of tuples of short status strings

    def __post_init__(self):
        n, m = len(self.target_ids), len(self.strategy_ids)
        rmse = np.ascontiguousarray(self.rmse, dtype=np.float64)
        folds = np.ascontiguousarray(self.fold_rmse, dtype=np.float64)
        if rmse.shape != (n, m):
            raise ValueError("rmse must be (n_targets, n_strategies)")
        if folds.shape[:2] != (n, m):
            raise ValueError("fold_rmse must be (n_targets, n_strategies, n_folds)")
        if len(self.status) != n or any(len(row) != m for row in self.status):
            raise ValueError("status must be (n_targets, n_strategies)")
        rmse.flags.writeable = False
        folds.flags.writeable = False
        object.__setattr__(self, "rmse", rmse)
        object.__setattr__(self, "fold_rmse", folds)
        object.__setattr__(self, "status", tuple(tuple(row) for row in self.status))
        object.__setattr__(
            self, "_t_index", {t: i for i, t in enumerate(self.target_ids)}
        )
        object.__setattr__(
            self, "_s_index", {s: j for j, s in enumerate(self.strategy_ids)}
        )

    @property
    def n_targets(self) -> int:
        return len(self.target_ids)

    @property
    def n_strategies(self) -> int:
        return len(self.strategy_ids)

    def cell(self, target_id, strategy_id) -> float:
        return float(self.rmse[self._t_index[target_id], self._s_index[strategy_id]])

    def target_row(self, target_id) -> np.ndarray:
        return self.rmse[self._t_index[target_id]]

    def restrict_targets(self, target_ids) -> "PerformanceMatrix":
        idx = [self._t_index[t] for t in target_ids]
        return PerformanceMatrix(
            tuple(target_ids),
            self.strategy_ids,
            self.rmse[idx],
            self.fold_rmse[idx],
            tuple(self.status[i] for i in idx),
        )

    def to_csv(self, path) -> None:
        """Long-form CSV: one row per (target, strategy) cell."""
        n_folds = self.fold_rmse.shape[2]
        header = ["target_id", "learner", "representation", "mean_rmse"]
        header += [f"fold_rmse_{k}" for k in range(n_folds)]
        header.append("status")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i, tid in enumerate(self.target_ids):
                for j, sid in enumerate(self.strategy_ids):
                    learner, rep = sid.rsplit(".", 1)
                    row = [tid, learner, rep]
                    if np.isnan(self.rmse[i, j]):
                        row.append("")
                        row.extend([""] * n_folds)
                    else:
                        row.append(repr(float(self.rmse[i, j])))
                        row.extend(repr(float(v)) for v in self.fold_rmse[i, j])
                    row.append(self.status[i][j])
                    writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "PerformanceMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            fold_cols = [h for h in header if h.startswith("fold_rmse_")]
            n_folds = len(fold_cols)
            cells = {}
            targets, strategies = [], []
            for row in reader:
                rec = dict(zip(header, row))
                tid = rec["target_id"]
                sid = f"{rec['learner']}.{rec['representation']}"
                if tid not in cells:
                    targets.append(tid)
                    cells[tid] = {}
                if sid not in cells[tid]:
                    if sid not in strategies:
                        strategies.append(sid)
                mean = float(rec["mean_rmse"]) if rec["mean_rmse"] else np.nan
                folds = [
                    float(rec[c]) if rec[c] else np.nan for c in fold_cols
                ]
                cells[tid][sid] = (mean, folds, rec["status"])
        n, m = len(targets), len(strategies)
        rmse = np.full((n, m), np.nan)
        fold_rmse = np.full((n, m, n_folds), np.nan)
        status = [["missing"] * m for _ in range(n)]
        for i, tid in enumerate(targets):
            for j, sid in enumerate(strategies):
                if sid in cells[tid]:
                    mean, folds, st = cells[tid][sid]
                    rmse[i, j] = mean
                    fold_rmse[i, j] = folds
                    status[i][j] = st
        return cls(tuple(targets), tuple(strategies), rmse, fold_rmse, status)


@dataclass(frozen=True)
class RankingVector:
    """Per-target tied ranks over strategies, 1 = best (lowest RMSE)."""

    target_id: str
    ranks: dict
    missing: frozenset = field(default_factory=frozenset)


def _clamped_log(rmse) -> np.ndarray:
    if np.any(rmse[~np.isnan(rmse)] < 0):
        raise ValueError("negative RMSE cell")
    return np.log(np.maximum(rmse, RMSE_CLAMP))


def armser(pm: PerformanceMatrix, *, include_self=True,
           max_missing=MAX_MISSING_FRACTION) -> dict:
    """Average RMSE ratio score per strategy; higher is better.

    For strategy p the score averages, over all scored strategies q, the
    geometric mean across targets of RMSE_q / RMSE_p; the q = p term
    contributes exactly 1.  Computed in log space.  Strategies missing
    more than ``max_missing`` of their targets are excluded; remaining
    missing cells drop the affected (pair, target) term.  The exclusive
    variant (``include_self=False``) averages over the m-1 opponents.
    """
    missing_frac = np.isnan(pm.rmse).mean(axis=0)
    scored = [j for j in range(pm.n_strategies) if missing_frac[j] <= max_missing]
    if not scored:
        raise ValueError("no strategy has enough observed cells to score")
    logs = _clamped_log(pm.rmse[:, scored])

    m = len(scored)
    scores = {}
    for pi in range(m):
        total = 0.0
        denom = 0
        for qi in range(m):
            if qi == pi:
                if include_self:
                    total += 1.0
                    denom += 1
                continue
            diff = logs[:, qi] - logs[:, pi]
            ok = ~np.isnan(diff)
            if not ok.any():
                raise ValueError(
                    "strategy pair shares no observed target; matrix too sparse"
                )
            total += float(np.exp(diff[ok].mean()))
            denom += 1
        scores[pm.strategy_ids[scored[pi]]] = total / denom
    return scores


def rank_strategies(pm: PerformanceMatrix) -> list:
    """Per-target ascending-RMSE tied ranks; missing cells rank last, flagged."""
    out = []
    for i, tid in enumerate(pm.target_ids):
        row = pm.rmse[i]
        present = ~np.isnan(row)
        m = pm.n_strategies
        k = int(present.sum())
        ranks = np.empty(m)
        if k:
            ranks[present] = rankdata_average(row[present])
        if k < m:
            ranks[~present] = 0.5 * (k + 1 + m)
        out.append(
            RankingVector(
                tid,
                {s: float(ranks[j]) for j, s in enumerate(pm.strategy_ids)},
                frozenset(s for j, s in enumerate(pm.strategy_ids) if not present[j]),
            )
        )
    return out


def rank_matrix(pm: PerformanceMatrix) -> np.ndarray:
    """Ranks of :func:`rank_strategies` stacked as an (n, m) array."""
    vectors = rank_strategies(pm)
    return np.asarray(
        [[rv.ranks[s] for s in pm.strategy_ids] for rv in vectors]
    )


def _pick_best(row, candidates, strategy_ids, scores):
    # argmin RMSE; ties by higher aRMSEr, then lexicographically smaller id
    best = None
    for j in candidates:
        v = row[j]
        if np.isnan(v):
            continue
        key = (v, -scores.get(strategy_ids[j], float("-inf")), strategy_ids[j])
        if best is None or key < best[0]:
            best = (key, strategy_ids[j])
    return None if best is None else best[1]


def best_strategy_labels(pm: PerformanceMatrix, scores=None) -> dict:
    """Lowest-RMSE strategy per target (ties via aRMSEr, then id)."""
    if scores is None:
        scores = armser(pm)
    labels = {}
    everyone = range(pm.n_strategies)
    for i, tid in enumerate(pm.target_ids):
        choice = _pick_best(pm.rmse[i], everyone, pm.strategy_ids, scores)
        if choice is None:
            raise ValueError(f"{tid}: all cells missing, cannot label")
        labels[tid] = choice
    return labels


def topk_strategies(pm: PerformanceMatrix, k: int, scores=None) -> tuple:
    """The k strategies with the best aRMSEr, ranked descending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if scores is None:
        scores = armser(pm)
    if k > len(scores):
        raise ValueError(f"k={k} exceeds the {len(scores)} scored strategies")
    ordered = sorted(scores, key=lambda s: (-scores[s], s))
    return tuple(ordered[:k])


def topk_labels(pm: PerformanceMatrix, k: int, scores=None) -> dict:
    """Label each target with its best strategy within the aRMSEr top-k set."""
    if scores is None:
        scores = armser(pm)
    chosen = topk_strategies(pm, k, scores)
    cols = [pm.strategy_ids.index(s) for s in chosen]
    labels = {}
    for i, tid in enumerate(pm.target_ids):
        choice = _pick_best(pm.rmse[i], cols, pm.strategy_ids, scores)
        if choice is None:
            raise ValueError(f"{tid}: no observed cell among the top-{k} strategies")
        labels[tid] = choice
    return labels
