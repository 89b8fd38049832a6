"""Rank statistics used by the pipeline.

Only the tests the pipeline needs: Spearman rank correlation, the Friedman
test with its chi-square approximation, the Nemenyi post-hoc critical
difference, and the Wilcoxon signed-rank test.  The chi-square CDF is
computed internally via the regularized incomplete gamma function
(series for x < a+1, Lentz continued fraction otherwise).
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TestResult",
    "ConstantInput",
    "rankdata_average",
    "spearman",
    "chi2_sf",
    "friedman_test",
    "nemenyi_posthoc",
    "wilcoxon_signed_rank",
]


class ConstantInput(ValueError):
    """Correlation is undefined for a constant vector."""


@dataclass
class TestResult:
    statistic: float
    p_value: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value must lie in [0, 1]")


def rankdata_average(x) -> np.ndarray:
    """Ranks 1..n with tied values sharing the average of their ranks."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i + 1
        while j < len(x) and x[order[j]] == x[order[i]]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + 1 + j)
        i = j
    return ranks


def spearman(a, b) -> float:
    """Spearman rank correlation: Pearson correlation of tied-average ranks.

    Reduces to 1 - 6*sum(d^2)/(n(n^2-1)) when there are no ties.  Raises
    :class:`ConstantInput` if either vector is constant.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("vectors must have equal length")
    if len(a) < 2:
        raise ValueError("need at least 2 observations")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ConstantInput("spearman is undefined for a constant vector")
    ra = rankdata_average(a)
    rb = rankdata_average(b)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra @ rb) / math.sqrt((ra @ ra) * (rb @ rb)))


# ---------------------------------------------------------------------------
# regularized incomplete gamma / chi-square


def _gammainc_lower_series(a, x, eps=1e-15, max_iter=500):
    # P(a, x) by the power series, valid for x < a + 1.
    term = 1.0 / a
    total = term
    n = a
    for _ in range(max_iter):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * eps:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gammainc_upper_cf(a, x, eps=1e-15, max_iter=500):
    # Q(a, x) by Lentz's continued fraction, valid for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_p(a, x):
    if x < 0 or a <= 0:
        raise ValueError("require x >= 0 and a > 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gammainc_lower_series(a, x)
    return 1.0 - _gammainc_upper_cf(a, x)


def chi2_sf(x, df) -> float:
    """Survival function of the chi-square distribution, Q(df/2, x/2)."""
    if df <= 0:
        raise ValueError("df must be > 0")
    x = float(x)
    if x <= 0:
        return 1.0
    a = df / 2.0
    half = x / 2.0
    if half < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gammainc_lower_series(a, half)))
    return min(1.0, max(0.0, _gammainc_upper_cf(a, half)))


def chi2_cdf(x, df) -> float:
    if df <= 0:
        raise ValueError("df must be > 0")
    if x <= 0:
        return 0.0
    return min(1.0, max(0.0, _gammainc_p(df / 2.0, x / 2.0)))


# ---------------------------------------------------------------------------
# Friedman / Nemenyi


def friedman_test(perf) -> TestResult:
    """Friedman test over an (n_rows x m_columns) performance matrix.

    Rows are ranked ascending (lower is better) with average ties; the
    tie-corrected chi-square statistic with m-1 degrees of freedom gives
    the p-value.  A matrix whose rows are entirely tied yields statistic 0
    and p = 1.
    """
    perf = np.asarray(perf, dtype=np.float64)
    if perf.ndim != 2 or perf.shape[0] < 2 or perf.shape[1] < 2:
        raise ValueError("need an (n >= 2) x (m >= 2) matrix")
    n, m = perf.shape

    ranks = np.empty_like(perf)
    tie_term = 0.0
    for i in range(n):
        ranks[i] = rankdata_average(perf[i])
        _, counts = np.unique(perf[i], return_counts=True)
        tie_term += float((counts**3 - counts).sum())

    col_sums = ranks.sum(axis=0)
    mean_ranks = col_sums / n
    correction = 1.0 - tie_term / (n * m * (m * m - 1.0))
    raw = 12.0 / (n * m * (m + 1.0)) * float((col_sums**2).sum()) - 3.0 * n * (m + 1.0)
    if correction <= 0.0:
        # every row fully tied: no evidence of any difference
        statistic = 0.0
    else:
        statistic = max(0.0, raw / correction)
    p = chi2_sf(statistic, m - 1) if statistic > 0 else 1.0
    return TestResult(
        statistic,
        p,
        extras={"df": m - 1, "mean_ranks": mean_ranks, "tie_correction": correction},
    )


# Studentized-range-based critical values q_alpha for the two-tailed Nemenyi
# test (infinite degrees of freedom, divided by sqrt(2)), for 2..20 compared
# models.  Values as tabulated in Demsar's 2006 JMLR survey of classifier
# comparison tests.
_Q_ALPHA = {
    0.05: (
        1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
        3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
    ),
    0.10: (
        1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
        2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
    ),
}


def nemenyi_critical_difference(m, n, alpha=0.05, q_alpha=None) -> float:
    """CD = q_alpha * sqrt(m(m+1) / (6n)) for m models over n rows."""
    if q_alpha is None:
        table = _Q_ALPHA.get(alpha)
        if table is None:
            raise ValueError(f"no embedded q table for alpha={alpha}; pass q_alpha")
        if not 2 <= m <= 20:
            raise ValueError("embedded q table covers 2..20 models; pass q_alpha")
        q_alpha = table[m - 2]
    return q_alpha * math.sqrt(m * (m + 1) / (6.0 * n))


def nemenyi_posthoc(perf, alpha=0.05, q_alpha=None) -> TestResult:
    """Pairwise Nemenyi comparison of columns of a performance matrix.

    A pair of columns differs significantly when the absolute difference
    of their mean ranks exceeds the critical difference.  ``statistic`` is
    the CD and ``p_value`` echoes ``alpha``; extras carry mean ranks, the
    pairwise |rank difference| matrix, and the boolean significance matrix.
    """
    perf = np.asarray(perf, dtype=np.float64)
    if perf.ndim != 2 or perf.shape[0] < 1 or perf.shape[1] < 2:
        raise ValueError("need an (n >= 1) x (m >= 2) matrix")
    n, m = perf.shape
    cd = nemenyi_critical_difference(m, n, alpha=alpha, q_alpha=q_alpha)

    ranks = np.vstack([rankdata_average(perf[i]) for i in range(n)])
    mean_ranks = ranks.mean(axis=0)
    diff = np.abs(mean_ranks[:, None] - mean_ranks[None, :])
    significant = diff > cd
    np.fill_diagonal(significant, False)
    return TestResult(
        cd,
        alpha,
        extras={
            "mean_ranks": mean_ranks,
            "rank_diff": diff,
            "significant": significant,
            "alpha": alpha,
        },
    )


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank


def _wilcoxon_exact_p(ranks, w_plus):
    # Distribution of W+ over all 2^n equally likely sign assignments,
    # using the observed (possibly tied) ranks doubled to integers.
    doubled = np.rint(2.0 * ranks).astype(int)
    max_sum = int(doubled.sum())
    counts = np.zeros(max_sum + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: max_sum + 1 - r]
        counts = counts + shifted
    counts /= counts.sum()
    w2 = int(round(2.0 * w_plus))
    p_le = counts[: w2 + 1].sum()
    p_ge = counts[w2:].sum()
    return min(1.0, 2.0 * min(p_le, p_ge))


def wilcoxon_signed_rank(a, b) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped.  Uses exact enumeration for n <= 12
    effective pairs and a tie-corrected normal approximation otherwise.
    All-zero differences give p = 1 by convention.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        return TestResult(0.0, 1.0, extras={"n_effective": 0, "method": "degenerate"})

    ranks = rankdata_average(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())

    if n <= 12:
        p = _wilcoxon_exact_p(ranks, w_plus)
        method = "exact"
        z = math.nan
    else:
        mean = n * (n + 1) / 4.0
        _, counts = np.unique(np.abs(d), return_counts=True)
        tie_term = float((counts**3 - counts).sum())
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
        z = (w_plus - mean) / math.sqrt(var)
        p = min(1.0, 2.0 * 0.5 * math.erfc(abs(z) / math.sqrt(2.0)))
        method = "normal"

    return TestResult(
        w_plus,
        p,
        extras={
            "n_effective": n,
            "w_plus": w_plus,
            "w_minus": w_minus,
            "z": z,
            "method": method,
        },
    )
