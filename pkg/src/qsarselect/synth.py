"""Synthetic desk-scale corpus generator with planted selection regimes.

Each synthetic target belongs to a regime that decides how its activity
is generated, and thereby which learner/representation strategy wins its
cross-validation.  The regime also leaves fingerprints the meta-level can
see: protein composition biases, grouping labels, fingerprint densities.
Everything is derived from (spec, seed), so equal inputs give equal
corpora byte for byte.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeds import rng_for
from .data import (
    ALLMOLPROP,
    AMINO_ACIDS,
    BASICMOLPROP,
    FPFCFP4,
    Dataset,
    ProteinTarget,
    Representation,
    dataset_filename,
    save_dataset,
    save_protein_targets,
)

__all__ = ["RegimeSpec", "SynthSpec", "SynthCorpus", "generate_synthetic_corpus",
           "write_corpus", "DEFAULT_REGIMES"]


@dataclass(frozen=True)
class RegimeSpec:
    """A planted rule: targets of this regime favor one strategy."""

    name: str
    favored_strategy: str
    weight: float


DEFAULT_REGIMES = (
    RegimeSpec("linear", "lm.basicmolprop", 0.25),
    RegimeSpec("stepwise", "rtree.basicmolprop", 0.25),
    RegimeSpec("similarity", "ksvmfp.fpFCFP4", 0.25),
    RegimeSpec("bits", "rforest.fpFCFP4", 0.25),
)

_KNOWN_REGIMES = {"linear", "stepwise", "similarity", "bits"}

# per-regime residue bias: these residues are drawn ~6x more often,
# shifting composition-sensitive protein descriptors by regime
_REGIME_RESIDUES = {
    "linear": "AVLI",
    "stepwise": "KRH",
    "similarity": "DENQ",
    "bits": "GPST",
}

_REGIME_L1 = {
    "linear": "Enzyme",
    "stepwise": "IonChannel",
    "similarity": "MembraneReceptor",
    "bits": "Transporter",
}

# fingerprint bit-density range per regime (shows up in aggregated bits)
_REGIME_FP_DENSITY = {
    "linear": (0.05, 0.25),
    "stepwise": (0.45, 0.65),
    "similarity": (0.3, 0.7),
    "bits": (0.15, 0.5),
}


@dataclass(frozen=True)
class SynthSpec:
    """Shape of the synthetic corpus.

    ``compounds_range`` is inclusive; widths default to small desk-scale
    values rather than the production 43/1447/1024.
    """

    n_targets: int
    compounds_range: tuple = (40, 60)
    basic_width: int = 12
    all_width: int = 48
    fp_width: int = 64
    noise: float = 0.15
    missing_rate: float = 0.02
    regimes: tuple = DEFAULT_REGIMES

    def __post_init__(self):
        if self.n_targets < 0:
            raise ValueError("n_targets must be >= 0")
        lo, hi = self.compounds_range
        if lo < 2 or hi < lo:
            raise ValueError("infeasible compounds_range; need 2 <= lo <= hi")
        if self.basic_width < 2 or self.all_width < self.basic_width:
            raise ValueError("need basic_width >= 2 and all_width >= basic_width")
        if self.fp_width < 8:
            raise ValueError("fp_width must be >= 8")
        if not 0 <= self.missing_rate < 1:
            raise ValueError("missing_rate must lie in [0, 1)")
        regimes = tuple(self.regimes)
        if not regimes:
            raise ValueError("at least one regime is required")
        for r in regimes:
            if r.name not in _KNOWN_REGIMES:
                raise ValueError(f"unknown regime {r.name!r}; known: {sorted(_KNOWN_REGIMES)}")
            if r.weight <= 0:
                raise ValueError("regime weights must be positive")
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "compounds_range", (lo, hi))


@dataclass(frozen=True)
class SynthCorpus:
    """Datasets (one triple per target), protein records, and ground truth."""

    datasets: tuple   # of (basic, all, fingerprint) Dataset triples
    proteins: tuple
    truth: dict       # target_id -> {"regime", "favored_strategy"}

    def as_corpus_dict(self) -> dict:
        """``{target_id: {kind: Dataset}}`` view for the evaluation harness."""
        out = {}
        for triple in self.datasets:
            out[triple[0].target_id] = {d.representation.kind: d for d in triple}
        return out


def _regime_assignment(spec: SynthSpec) -> list:
    # largest-remainder apportionment of n_targets over regime weights,
    # then interleaved so folds stay balanced
    total_w = sum(r.weight for r in spec.regimes)
    exact = [spec.n_targets * r.weight / total_w for r in spec.regimes]
    counts = [int(np.floor(e)) for e in exact]
    remainder = spec.n_targets - sum(counts)
    order = sorted(range(len(exact)), key=lambda i: exact[i] - counts[i], reverse=True)
    for i in order[:remainder]:
        counts[i] += 1
    pools = [[r] * c for r, c in zip(spec.regimes, counts)]
    assignment = []
    while any(pools):
        for pool in pools:
            if pool:
                assignment.append(pool.pop())
    return assignment


def _sequence(regime: str, rng) -> str:
    boosted = _REGIME_RESIDUES[regime]
    weights = np.asarray([6.0 if aa in boosted else 1.0 for aa in AMINO_ACIDS])
    probs = weights / weights.sum()
    length = int(rng.integers(80, 251))
    return "".join(rng.choice(list(AMINO_ACIDS), size=length, p=probs))


def _groupings(regime: str, rng) -> tuple:
    l1 = _REGIME_L1[regime]
    l2 = f"{l1}Sub{int(rng.integers(3))}"
    l3 = f"{l1}Fam{int(rng.integers(4))}" if rng.random() < 0.7 else ""
    l4 = f"{l1}Grp{int(rng.integers(5))}" if l3 and rng.random() < 0.5 else ""
    l5 = f"{l1}Cls{int(rng.integers(6))}" if l4 and rng.random() < 0.4 else ""
    l6 = ""
    preferred = f"{l1}-{int(rng.integers(8))}"
    return (l1, l2, l3, l4, l5, l6), preferred


def _standardize(signal) -> np.ndarray:
    sd = signal.std()
    if sd == 0:
        return signal - signal.mean()
    return (signal - signal.mean()) / sd


def _fingerprints(regime: str, n, width, rng):
    """Fingerprint matrix plus regime-specific signal carriers."""
    lo, hi = _REGIME_FP_DENSITY[regime]
    if regime == "similarity":
        proto = (rng.random(width) < 0.5).astype(np.float64)
        flip = rng.uniform(0.05, 0.45, size=n)
        noise = rng.random((n, width)) < flip[:, None]
        fp = np.where(noise, 1.0 - proto[None, :], proto[None, :])
        return fp, {"prototype": proto}
    density = rng.uniform(lo, hi, size=width)
    extras = {}
    if regime == "bits":
        # driver bits sit at mid density so both branches of a split are
        # populated; which bits drive the activity is drawn here
        sites = rng.choice(width, size=6, replace=False)
        density[sites] = rng.uniform(0.35, 0.65, size=6)
        extras["sites"] = sites
    fp = (rng.random((n, width)) < density[None, :]).astype(np.float64)
    return fp, extras


def _activity(regime: str, basic, fp, extras, noise, rng):
    n = basic.shape[0]
    if regime == "linear":
        beta = rng.normal(size=basic.shape[1])
        signal = basic @ beta
    elif regime == "stepwise":
        signal = 1.0 * np.sign(basic[:, 0]) + 0.45 * np.sign(basic[:, 1])
    elif regime == "similarity":
        proto = extras["prototype"]
        inter = np.minimum(fp, proto[None, :]).sum(axis=1)
        union = np.maximum(fp, proto[None, :]).sum(axis=1)
        signal = np.where(union > 0, inter / np.maximum(union, 1.0), 1.0)
    elif regime == "bits":
        # interaction-heavy bit logic: axis-aligned and nearly invisible
        # to a whole-vector similarity kernel
        s = fp[:, extras["sites"]]
        signal = (
            2.2 * s[:, 0] * s[:, 1]
            - 1.8 * s[:, 2] * s[:, 3]
            + 0.9 * s[:, 4]
            - 0.8 * s[:, 5]
        )
    else:  # pragma: no cover - guarded by SynthSpec validation
        raise ValueError(regime)
    return _standardize(signal) + noise * rng.normal(size=n)


def _sprinkle_missing(X, rate, rng):
    if rate <= 0:
        return np.zeros_like(X, dtype=bool)
    mask = rng.random(X.shape) < rate
    # keep at least one observed value per column so imputation stays defined
    for j in np.flatnonzero(mask.all(axis=0)):
        mask[int(rng.integers(X.shape[0])), j] = False
    return mask


def generate_synthetic_corpus(spec: SynthSpec, seed: int) -> SynthCorpus:
    """Generate the full corpus deterministically from (spec, seed)."""
    reps = {
        BASICMOLPROP: Representation(BASICMOLPROP, spec.basic_width),
        ALLMOLPROP: Representation(ALLMOLPROP, spec.all_width),
        FPFCFP4: Representation(FPFCFP4, spec.fp_width),
    }
    assignment = _regime_assignment(spec)

    triples = []
    proteins = []
    truth = {}
    for i, regime_spec in enumerate(assignment):
        regime = regime_spec.name
        tid = f"SYN{i:04d}"
        rng = rng_for(seed, "target", i)

        n = int(rng.integers(spec.compounds_range[0], spec.compounds_range[1] + 1))
        basic = rng.normal(size=(n, spec.basic_width))
        extra = rng.normal(size=(n, spec.all_width - spec.basic_width))
        allfeat = np.hstack([basic, extra])
        fp, extras = _fingerprints(regime, n, spec.fp_width, rng)
        y = _activity(regime, basic, fp, extras, spec.noise, rng)

        basic_mask = _sprinkle_missing(basic, spec.missing_rate, rng)
        all_mask = np.hstack(
            [basic_mask, _sprinkle_missing(extra, spec.missing_rate, rng)]
        )

        basic_names = tuple(f"bmp_{j:03d}" for j in range(spec.basic_width))
        all_names = basic_names + tuple(
            f"amp_{j:03d}" for j in range(spec.all_width - spec.basic_width)
        )
        fp_names = tuple(f"bit_{j:03d}" for j in range(spec.fp_width))

        masked_basic = np.where(basic_mask, 0.0, basic)
        masked_all = np.where(all_mask, 0.0, allfeat)
        triples.append(
            (
                Dataset(tid, reps[BASICMOLPROP], basic_names, masked_basic, basic_mask, y),
                Dataset(tid, reps[ALLMOLPROP], all_names, masked_all, all_mask, y),
                Dataset(tid, reps[FPFCFP4], fp_names, fp,
                        np.zeros_like(fp, dtype=bool), y),
            )
        )

        levels, preferred = _groupings(regime, rng)
        proteins.append(ProteinTarget(tid, _sequence(regime, rng), levels, preferred))
        truth[tid] = {"regime": regime, "favored_strategy": regime_spec.favored_strategy}

    return SynthCorpus(tuple(triples), tuple(proteins), truth)


def write_corpus(corpus: SynthCorpus, out_dir) -> list:
    """Write datasets, FASTA, groupings and the ground-truth sidecar.

    Returns the list of files written (relative to ``out_dir``).
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    datasets_dir = os.path.join(out_dir, "datasets")
    os.makedirs(datasets_dir, exist_ok=True)

    written = []
    for triple in corpus.datasets:
        for ds in triple:
            name = dataset_filename(ds.target_id, ds.representation)
            save_dataset(ds, os.path.join(datasets_dir, name))
            written.append(os.path.join("datasets", name))

    save_protein_targets(
        corpus.proteins,
        os.path.join(out_dir, "proteins.fasta"),
        os.path.join(out_dir, "groupings.csv"),
    )
    written += ["proteins.fasta", "groupings.csv"]

    with open(os.path.join(out_dir, "truth.json"), "w", encoding="utf-8") as fh:
        json.dump(corpus.truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append("truth.json")
    return written
