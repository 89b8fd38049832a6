"""10-fold cross-validation harness producing the RMSE performance matrix.

Every (strategy, target) cell derives its own seed from the run seed and
the cell key, so results are identical whether cells run sequentially or
on a worker pool, and in any order.
"""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._seeds import derive_seed
from .data import Dataset, impute_median
from .learners import LearnerSpec, Strategy, train
from .perf import PerformanceMatrix

__all__ = ["TooFewRows", "CvResult", "rmse", "make_folds", "cross_validate", "evaluate_all"]

# targets below this row count are skipped and logged, not failed
MIN_ROWS = 10


class TooFewRows(ValueError):
    """Dataset has fewer rows than cross-validation folds."""


@dataclass(frozen=True)
class CvResult:
    strategy: Strategy
    target_id: str
    fold_rmse: np.ndarray
    mean_rmse: float

    def __post_init__(self):
        folds = np.ascontiguousarray(self.fold_rmse, dtype=np.float64)
        folds.flags.writeable = False
        object.__setattr__(self, "fold_rmse", folds)
        object.__setattr__(self, "mean_rmse", float(folds.mean()))


def rmse(y_true, y_pred) -> float:
    """Root mean squared error of a prediction vector."""
    y_true = np.asarray(y_true, dtype=np.float64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.float64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ValueError("vectors must have equal length")
    if y_true.size == 0:
        raise ValueError("vectors must be nonempty")
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def make_folds(n_rows: int, n_folds: int, rng) -> list:
    """Disjoint covering folds whose sizes differ by at most one.

    Rows are shuffled once and dealt round-robin into folds.
    """
    perm = rng.permutation(n_rows)
    return [np.sort(perm[i::n_folds]) for i in range(n_folds)]


def cross_validate(spec: LearnerSpec, dataset: Dataset, n_folds: int = 10,
                   seed: int = 0) -> CvResult:
    """Per-fold held-out RMSE of ``spec`` on an imputed dataset."""
    n = dataset.n_compounds
    if n < n_folds:
        raise TooFewRows(
            f"{dataset.target_id}: {n} rows < {n_folds} folds"
        )
    rng = np.random.default_rng(derive_seed(seed, "folds"))
    folds = make_folds(n, n_folds, rng)

    X = dataset.features
    y = dataset.activity
    fold_scores = np.empty(n_folds)
    for i, test_idx in enumerate(folds):
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        sub = Dataset(
            dataset.target_id,
            dataset.representation,
            dataset.feature_names,
            X[train_mask],
            np.zeros((int(train_mask.sum()), X.shape[1]), dtype=bool),
            y[train_mask],
        )
        model = train(spec, sub, seed=derive_seed(seed, "fold-model", i))
        fold_scores[i] = rmse(y[test_idx], model.predict(X[test_idx]))

    strategy = Strategy(spec, dataset.representation)
    return CvResult(strategy, dataset.target_id, fold_scores, float(fold_scores.mean()))


def _evaluate_cell(args):
    spec, dataset, n_folds, cell_seed = args
    try:
        result = cross_validate(spec, dataset, n_folds=n_folds, seed=cell_seed)
        return result.mean_rmse, np.asarray(result.fold_rmse), "ok"
    except TooFewRows:
        return np.nan, None, "skipped_too_few_rows"
    except Exception as exc:  # record, don't abort the sweep
        return np.nan, None, f"failed:{type(exc).__name__}"


def evaluate_all(corpus: dict, strategies, seed: int = 0, n_folds: int = 10,
                 n_jobs: int = 1) -> PerformanceMatrix:
    """Cross-validate every strategy on every target of a corpus.

    Parameters
    ----------
    corpus : dict
        ``{target_id: {representation_kind: Dataset}}``.  Datasets may
        still contain missing values; they are median-imputed here, once
        per dataset.
    strategies : sequence of Strategy
        Validated upfront (the Tanimoto learner only pairs with the
        fingerprint representation).
    seed : int
        Run seed; each cell derives its own child seed from it.
    n_jobs : int
        Worker processes; results are independent of the pool size.

    Partial failures become missing cells with a status reason.
    """
    strategies = list(strategies)
    if not strategies:
        raise ValueError("strategy list is empty")
    ids = [s.id for s in strategies]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate strategy ids")

    target_ids = tuple(sorted(corpus))
    imputed = {}
    for tid in target_ids:
        imputed[tid] = {}
        for kind, ds in corpus[tid].items():
            imputed[tid][kind] = impute_median(ds) if ds.has_missing else ds

    n, m = len(target_ids), len(strategies)
    rmse_mat = np.full((n, m), np.nan)
    fold_mat = np.full((n, m, n_folds), np.nan)
    status = [["missing_representation"] * m for _ in range(n)]

    tasks = []
    slots = []
    for i, tid in enumerate(target_ids):
        for j, strat in enumerate(strategies):
            ds = imputed[tid].get(strat.representation.kind)
            if ds is None:
                continue
            cell_seed = derive_seed(seed, "eval", strat.id, tid)
            tasks.append((strat.learner, ds, n_folds, cell_seed))
            slots.append((i, j))

    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_evaluate_cell, tasks, chunksize=8))
    else:
        outcomes = [_evaluate_cell(t) for t in tasks]

    for (i, j), (mean, folds, st) in zip(slots, outcomes):
        status[i][j] = st
        if st == "ok":
            rmse_mat[i, j] = mean
            fold_mat[i, j] = folds

    skipped = sum(st == "skipped_too_few_rows" for row in status for st in row)
    if skipped:
        warnings.warn(f"skipped {skipped} cells with fewer than {n_folds} rows",
                      stacklevel=2)

    return PerformanceMatrix(target_ids, tuple(ids), rmse_mat, fold_mat, status)
