"""Per-target meta-feature extraction and corpus-level assembly.

A target's meta-feature vector concatenates, in a fixed global order:
information-theoretic and moment summaries of each dataset representation
(response summaries and the compound count appear once, since they are
identical across representations), the aggregated fingerprint, protein
descriptors, and grouping encodings.  Grouping encodings depend on a
vocabulary built over training targets only.
"""

import csv
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .data import ALLMOLPROP, BASICMOLPROP, FPFCFP4, Dataset, ProteinTarget
from .infotheory import DEFAULT_BINS, entropy_normalized, mutual_information, total_correlation
from .protein import protein_descriptors

__all__ = [
    "GROUP_INFO_THEORY",
    "GROUP_AGG_FINGERPRINT",
    "GROUP_PROTEIN",
    "GROUP_GROUPING",
    "MetaFeature",
    "MetaFeatureVector",
    "GroupingVocab",
    "dataset_metafeatures",
    "aggregate_fingerprint",
    "encode_groupings",
    "assemble_metafeatures",
    "build_meta_matrix",
    "write_meta_csv",
]

GROUP_INFO_THEORY = "InfoTheory"
GROUP_AGG_FINGERPRINT = "AggFingerprint"
GROUP_PROTEIN = "ProteinDescriptor"
GROUP_GROUPING = "Grouping"

REP_ORDER = (BASICMOLPROP, ALLMOLPROP, FPFCFP4)


@dataclass(frozen=True)
class MetaFeature:
    name: str
    value: float
    group: str


@dataclass(frozen=True)
class MetaFeatureVector:
    """Ordered named meta-features for one target; NaN marks a flagged gap."""

    target_id: str
    entries: tuple

    @property
    def names(self) -> tuple:
        return tuple(e.name for e in self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.asarray([e.value for e in self.entries])

    @property
    def groups(self) -> tuple:
        return tuple(e.group for e in self.entries)


def _moments(x):
    x = np.asarray(x, dtype=np.float64)
    mean = float(x.mean())
    centered = x - mean
    m2 = float((centered**2).mean())
    if m2 == 0.0:
        return mean, 0.0, 0.0, 0.0
    m3 = float((centered**3).mean())
    m4 = float((centered**4).mean())
    sd = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    skew = m3 / m2**1.5
    kurt = m4 / m2**2 - 3.0
    return mean, sd, skew, kurt


def dataset_metafeatures(dataset: Dataset, n_bins: int = DEFAULT_BINS) -> list:
    """Scalar summaries of one dataset as (name, value) pairs.

    Emits the size counts, feature moments (average mean / average
    standard deviation over columns), mean normalized feature entropy,
    mean feature-activity mutual information, total correlation of the
    features, and the response moments and normalized entropy.
    """
    if dataset.has_missing:
        raise ValueError(f"{dataset.target_id}: impute before extracting meta-features")
    X = dataset.features
    y = dataset.activity
    p = X.shape[1]

    col_means = X.mean(axis=0)
    col_sds = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(p)
    nent_feat = float(np.mean([entropy_normalized(X[:, j], n_bins) for j in range(p)]))
    mi_feat = float(np.mean([mutual_information(X[:, j], y, n_bins) for j in range(p)]))
    multiinfo = total_correlation(X, n_bins) if p >= 2 else 0.0

    mean_y, sd_y, skew_y, kurt_y = _moments(y)
    return [
        ("n_compounds", float(dataset.n_compounds)),
        ("n_features", float(p)),
        ("multiinfo", float(multiinfo)),
        ("mutualinfo", mi_feat),
        ("nentropyfeat", nent_feat),
        ("mmeanfeat", float(col_means.mean())),
        ("msdfeat", float(col_sds.mean())),
        ("meanresp", mean_y),
        ("sdresp", sd_y),
        ("skewresp", skew_y),
        ("kurtresp", kurt_y),
        ("nentropyresp", entropy_normalized(y, n_bins)),
    ]


# representation-invariant summaries emitted once per target
_SHARED_NAMES = ("n_compounds", "meanresp", "sdresp", "skewresp", "kurtresp",
                 "nentropyresp")


def aggregate_fingerprint(dataset: Dataset) -> np.ndarray:
    """Per-bit fraction of compounds with that fingerprint bit set."""
    if not dataset.representation.is_fingerprint:
        raise ValueError(
            f"aggregate_fingerprint needs {FPFCFP4}, got {dataset.representation.kind}"
        )
    if dataset.has_missing:
        raise ValueError("impute before aggregating fingerprints")
    return dataset.features.mean(axis=0)


class GroupingVocab:
    """Grouping vocabulary built over the training corpus only.

    L1 and L2 values get one-hot indicators; the deeper levels and the
    preferred name are frequency-encoded with their training group size
    (an unseen or empty group encodes as 0).
    """

    def __init__(self, targets):
        targets = list(targets)
        self.l1 = tuple(sorted({t.class_levels[0] for t in targets} - {""}))
        self.l2 = tuple(sorted({t.class_levels[1] for t in targets} - {""}))
        self.level_sizes = {}
        for level in range(2, 6):
            counter = Counter(
                t.class_levels[level] for t in targets if t.class_levels[level]
            )
            self.level_sizes[level] = dict(counter)
        self.name_sizes = dict(
            Counter(t.preferred_name for t in targets if t.preferred_name)
        )

    def feature_names(self) -> list:
        names = [f"grp_L1_{v}" for v in self.l1]
        names += [f"grp_L2_{v}" for v in self.l2]
        names += [f"grp_L{level + 1}_size" for level in range(2, 6)]
        names.append("grp_prefname_size")
        return names


def encode_groupings(target: ProteinTarget, vocab: GroupingVocab) -> list:
    """Grouping meta-features for one target under a fixed vocabulary."""
    out = []
    for v in vocab.l1:
        out.append((f"grp_L1_{v}", 1.0 if target.class_levels[0] == v else 0.0))
    for v in vocab.l2:
        out.append((f"grp_L2_{v}", 1.0 if target.class_levels[1] == v else 0.0))
    for level in range(2, 6):
        value = target.class_levels[level]
        size = vocab.level_sizes[level].get(value, 0) if value else 0
        out.append((f"grp_L{level + 1}_size", float(size)))
    name_size = vocab.name_sizes.get(target.preferred_name, 0) if target.preferred_name else 0
    out.append(("grp_prefname_size", float(name_size)))
    return out


def assemble_metafeatures(target_id: str, datasets: dict, protein: ProteinTarget,
                          vocab: GroupingVocab = None, n_bins: int = DEFAULT_BINS,
                          *, include_dipeptide=True) -> MetaFeatureVector:
    """Concatenate all meta-feature blocks for one target.

    ``datasets`` maps representation kind to the (imputed) dataset.  A
    missing representation leaves its block as NaN gaps so corpus assembly
    can impute and flag them.  Grouping features are omitted when no
    vocabulary is given (the meta-CV encodes them per training fold).
    """
    entries = []

    first = next(
        (datasets[k] for k in REP_ORDER if datasets.get(k) is not None), None
    )
    if first is None:
        raise ValueError(f"{target_id}: no representation available")

    shared = dict(dataset_metafeatures(first, n_bins))
    for name in _SHARED_NAMES:
        entries.append(MetaFeature(name, shared[name], GROUP_INFO_THEORY))

    fp_width = None
    for kind in REP_ORDER:
        ds = datasets.get(kind)
        if ds is not None and kind == FPFCFP4:
            fp_width = ds.n_features
        if ds is None:
            for name in ("n_features", "multiinfo", "mutualinfo", "nentropyfeat",
                         "mmeanfeat", "msdfeat"):
                entries.append(MetaFeature(f"{kind}.{name}", np.nan, GROUP_INFO_THEORY))
            continue
        scalars = dict(dataset_metafeatures(ds, n_bins))
        for name in ("n_features", "multiinfo", "mutualinfo", "nentropyfeat",
                     "mmeanfeat", "msdfeat"):
            entries.append(MetaFeature(f"{kind}.{name}", scalars[name], GROUP_INFO_THEORY))

    fp = datasets.get(FPFCFP4)
    if fp is not None:
        agg = aggregate_fingerprint(fp)
        for j, v in enumerate(agg):
            entries.append(
                MetaFeature(f"aggFCFP4fp_{j:04d}", float(v), GROUP_AGG_FINGERPRINT)
            )
    elif fp_width is not None:
        for j in range(fp_width):
            entries.append(MetaFeature(f"aggFCFP4fp_{j:04d}", np.nan, GROUP_AGG_FINGERPRINT))

    for name, value in protein_descriptors(protein.sequence,
                                           include_dipeptide=include_dipeptide):
        entries.append(MetaFeature(name, value, GROUP_PROTEIN))

    if vocab is not None:
        for name, value in encode_groupings(protein, vocab):
            entries.append(MetaFeature(name, value, GROUP_GROUPING))

    return MetaFeatureVector(target_id, tuple(entries))


def build_meta_matrix(vectors) -> tuple:
    """Stack aligned vectors into (matrix, names, groups, imputed_mask).

    All vectors must share one global ordering.  NaN gaps are imputed with
    the corpus column median and flagged in the returned mask.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("no meta-feature vectors")
    names = vectors[0].names
    groups = vectors[0].groups
    for v in vectors[1:]:
        if v.names != names:
            raise ValueError(
                f"{v.target_id}: meta-feature ordering differs from {vectors[0].target_id}"
            )
    X = np.vstack([v.values for v in vectors])
    imputed = np.isnan(X)
    if imputed.any():
        for j in np.flatnonzero(imputed.any(axis=0)):
            col = X[:, j]
            present = col[~np.isnan(col)]
            fill = float(np.median(present)) if present.size else 0.0
            col[np.isnan(col)] = fill
    return X, names, groups, imputed


def write_meta_csv(path, target_ids, X, names, groups) -> None:
    """Meta-dataset CSV plus a JSON sidecar mapping column to group tag."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("target_id",) + tuple(names))
        for tid, row in zip(target_ids, X):
            writer.writerow([tid] + [repr(float(v)) for v in row])
    sidecar = str(path) + ".groups.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(dict(zip(names, groups)), fh, indent=2, sort_keys=True)
        fh.write("\n")
