"""Histogram-based information measures over dataset columns.

All measures discretize real vectors into equal-width bins (10 by
default) and work with empirical plug-in probabilities and natural
logarithms.  Entropies are normalized by log(n_bins) so they land in
[0, 1] regardless of the bin count.
"""

import numpy as np

from ._seeds import rng_for

__all__ = [
    "discretize",
    "entropy_normalized",
    "mutual_information",
    "total_correlation",
]

DEFAULT_BINS = 10
# joint tables beyond this many columns are estimated on random subsets
TC_MAX_COLUMNS = 5
TC_DRAWS = 10


def discretize(x, n_bins: int) -> np.ndarray:
    """Equal-width bin indices over [min(x), max(x)].

    Constant vectors map to bin 0; the maximum lands in the top bin.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("x must be nonempty")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    lo = x.min()
    span = x.max() - lo
    if span == 0.0:
        return np.zeros(x.size, dtype=np.int64)
    bins = ((x - lo) / span * n_bins).astype(np.int64)
    return np.minimum(bins, n_bins - 1)


def _entropy_from_counts(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def entropy_normalized(x, n_bins: int = DEFAULT_BINS) -> float:
    """Shannon entropy of the binned distribution divided by log(n_bins)."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    codes = discretize(x, n_bins)
    return _entropy_from_counts(np.bincount(codes)) / np.log(n_bins)


def mutual_information(x, y, n_bins: int = DEFAULT_BINS) -> float:
    """Mutual information of the joint binned distribution, in nats.

    Equals H(Y) - H(Y|X); zero exactly when the binned variables are
    independent.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    bx = discretize(x, n_bins)
    by = discretize(y, n_bins)
    joint = np.bincount(bx * n_bins + by, minlength=n_bins * n_bins)
    h_joint = _entropy_from_counts(joint)
    h_x = _entropy_from_counts(np.bincount(bx))
    h_y = _entropy_from_counts(np.bincount(by))
    return h_x + h_y - h_joint


def _joint_entropy(codes, n_bins) -> float:
    # codes: (n, k) bin indices; key each row as an integer in base n_bins
    weights = n_bins ** np.arange(codes.shape[1], dtype=np.int64)
    keys = codes @ weights
    _, counts = np.unique(keys, return_counts=True)
    return _entropy_from_counts(counts)


def total_correlation(features, n_bins: int = DEFAULT_BINS, *,
                      max_columns: int = TC_MAX_COLUMNS, n_draws: int = TC_DRAWS,
                      seed: int = 0) -> float:
    """Total correlation sum_j H(X_j) - H(X_1..X_k) of the binned columns.

    Joint tables over many columns are intractable, so matrices wider
    than ``max_columns`` are estimated by averaging the measure over
    ``n_draws`` seeded random column subsets of that size.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("need a matrix with at least 2 columns")
    p = X.shape[1]
    codes = np.column_stack([discretize(X[:, j], n_bins) for j in range(p)])
    marginal_h = np.asarray(
        [_entropy_from_counts(np.bincount(codes[:, j])) for j in range(p)]
    )

    def tc_of(cols):
        return float(marginal_h[cols].sum() - _joint_entropy(codes[:, cols], n_bins))

    if p <= max_columns:
        return tc_of(np.arange(p))

    rng = rng_for(seed, "total-correlation", p, n_bins)
    draws = [np.sort(rng.choice(p, size=max_columns, replace=False))
             for _ in range(n_draws)]
    return float(np.mean([tc_of(cols) for cols in draws]))
