"""Segmentation-comparison metrics and the accompanying statistics: overlap
(Dice), boundary distance (Hausdorff), order statistics with a bootstrap
median CI, rank-sum and one-sample t tests, and a two-rater intraclass
correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats as sstats
from scipy.spatial import cKDTree

from .imaging import BinaryMask

BOOTSTRAP_RESAMPLES = 2000


class UndefinedDistanceError(ValueError):
    """Hausdorff distance of an empty mask is undefined."""

    token = "undefined-distance"


class DegenerateSampleError(ValueError):
    """A test statistic's denominator vanished (zero sample variance)."""

    token = "degenerate-sample"


@dataclass(frozen=True)
class EvalRecord:
    """One lesion's manual vs semiautomatic comparison row."""

    lesion_id: str
    dsc: float
    hd: float
    diam_a_diff: float
    diam_b_diff: float
    time_manual: float
    time_semi: float
    satisfied: bool

    def __post_init__(self):
        if not (0.0 <= self.dsc <= 1.0):
            raise ValueError("dsc must lie in [0, 1]")
        if self.hd < 0 or self.diam_a_diff < 0 or self.diam_b_diff < 0:
            raise ValueError("distances must be >= 0")
        if not (self.time_manual > 0 and self.time_semi > 0):
            raise ValueError("times must be positive")


@dataclass(frozen=True)
class SummaryStats:
    """Median / quartiles / range plus a 95% bootstrap CI of the median."""

    n: int
    median: float
    q1: float
    q3: float
    min: float
    max: float
    ci_low: float
    ci_high: float

    def __post_init__(self):
        if not (self.min <= self.q1 <= self.median <= self.q3 <= self.max):
            raise ValueError("order statistics out of order")
        if not (self.ci_low <= self.median <= self.ci_high):
            raise ValueError("median must lie inside its CI")


# ---------------------------------------------------------------------------
# Overlap metrics
# ---------------------------------------------------------------------------


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A n B| / (|A| + |B|); two empty masks agree perfectly (1.0)."""
    if a.bits.shape != b.bits.shape:
        raise ValueError("mask dimensions differ")
    total = int(a.bits.sum()) + int(b.bits.sum())
    if total == 0:
        return 1.0
    inter = int(np.logical_and(a.bits, b.bits).sum())
    return 2.0 * inter / total


def boundary_points(mask: BinaryMask) -> np.ndarray:
    """(x, y) coordinates of foreground pixels with a 4-connected background
    neighbor, counting the outside of the raster as background."""
    padded = np.pad(mask.bits, 1, constant_values=False)
    has_bg = (
        ~padded[:-2, 1:-1]
        | ~padded[2:, 1:-1]
        | ~padded[1:-1, :-2]
        | ~padded[1:-1, 2:]
    )
    ys, xs = np.nonzero(mask.bits & has_bg)
    return np.column_stack([xs, ys]).astype(np.float64)


def hausdorff(a: BinaryMask, b: BinaryMask) -> float:
    """Symmetric Hausdorff distance between the masks' boundary pixels,
    Euclidean metric."""
    if a.bits.shape != b.bits.shape:
        raise ValueError("mask dimensions differ")
    pa = boundary_points(a)
    pb = boundary_points(b)
    if pa.size == 0 or pb.size == 0:
        raise UndefinedDistanceError("Hausdorff distance needs two non-empty masks")
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------


def summarize(samples, rng_seed: int = 0) -> SummaryStats:
    """Quartiles by linear interpolation between order statistics and a 95%
    percentile-bootstrap CI of the median (2000 resamples, PCG64 generator
    seeded by ``rng_seed`` for cross-platform reproducibility)."""
    x = np.asarray(list(samples), dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q1, med, q3 = np.percentile(x, [25.0, 50.0, 75.0])
    if x.size == 1:
        lo = hi = float(x[0])
    else:
        rng = np.random.default_rng(rng_seed)
        idx = rng.integers(0, x.size, size=(BOOTSTRAP_RESAMPLES, x.size))
        medians = np.median(x[idx], axis=1)
        lo, hi = np.percentile(medians, [2.5, 97.5])
    return SummaryStats(
        n=int(x.size),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        min=float(x.min()),
        max=float(x.max()),
        ci_low=float(lo),
        ci_high=float(hi),
    )


# ---------------------------------------------------------------------------
# Hypothesis tests
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _u_counts(m: int, n: int) -> tuple:
    """Number of rank arrangements per U value for group sizes m, n (no
    ties): counts[u] over u in [0, m*n], by the standard recurrence."""
    if m == 0 or n == 0:
        return (1,)
    shorter = _u_counts(m - 1, n)
    longer = _u_counts(m, n - 1)
    counts = [0] * (m * n + 1)
    # Either the largest rank belongs to group 1 (adds n to U) or group 2.
    for u, c in enumerate(shorter):
        counts[u + n] += c
    for u, c in enumerate(longer):
        counts[u] += c
    return tuple(counts)


def wilcoxon_rank_sum(x, y) -> tuple[float, float]:
    """Mann-Whitney U (midranks for ties) with two-sided p.

    Exact p from the full U distribution when the pooled size is <= 12 and
    there are no ties; otherwise the normal approximation with tie and
    continuity corrections. Returns (U of the first sample, p).
    """
    x = np.asarray(list(x), dtype=np.float64)
    y = np.asarray(list(y), dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    m, n = x.size, y.size
    pooled = np.concatenate([x, y])
    ranks = sstats.rankdata(pooled)
    r1 = ranks[:m].sum()
    u1 = r1 - m * (m + 1) / 2.0

    has_ties = np.unique(pooled).size < pooled.size
    if m + n <= 12 and not has_ties:
        counts = np.array(_u_counts(m, n), dtype=np.float64)
        total = counts.sum()
        u_int = int(round(u1))
        p_le = counts[: u_int + 1].sum() / total
        p_ge = counts[u_int:].sum() / total
        p = min(1.0, 2.0 * min(p_le, p_ge))
        return float(u1), float(p)

    mu = m * n / 2.0
    tie_counts = np.unique(pooled, return_counts=True)[1]
    tie_term = ((tie_counts**3 - tie_counts).sum()) / ((m + n) * (m + n - 1))
    var = m * n / 12.0 * ((m + n + 1) - tie_term)
    if var <= 0:
        return float(u1), 1.0
    z = max(abs(u1 - mu) - 0.5, 0.0) / math.sqrt(var)
    p = math.erfc(z / math.sqrt(2.0))
    return float(u1), float(min(1.0, p))


def one_sample_ttest(diffs, mu0: float) -> tuple[float, float]:
    """t = (mean - mu0) / (s / sqrt(n)), two-sided p on n-1 degrees of
    freedom. Zero sample variance is an error, not a p-value."""
    x = np.asarray(list(diffs), dtype=np.float64)
    if x.size < 2:
        raise ValueError("t-test needs at least two observations")
    s = x.std(ddof=1)
    if s == 0.0:
        raise DegenerateSampleError("sample variance is zero")
    t = (x.mean() - mu0) / (s / math.sqrt(x.size))
    p = 2.0 * float(sstats.t.sf(abs(t), df=x.size - 1))
    return float(t), min(1.0, p)


def icc_absolute_agreement(ratings) -> float:
    """Two-way random effects, absolute agreement, single-measure intraclass
    correlation for an (n_subjects, 2) rating matrix.

    Constant matrices return 1.0 by convention (all raters agree exactly).
    """
    y = np.asarray(ratings, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ValueError("ratings must be an (n_subjects, 2) matrix")
    n, k = y.shape
    if n < 3:
        raise ValueError("need at least 3 subjects")
    if not np.isfinite(y).all():
        raise ValueError("ratings must be finite (no missing cells)")

    grand = y.mean()
    row_means = y.mean(axis=1)
    col_means = y.mean(axis=0)
    ss_rows = k * ((row_means - grand) ** 2).sum()
    ss_cols = n * ((col_means - grand) ** 2).sum()
    ss_total = ((y - grand) ** 2).sum()
    ss_err = ss_total - ss_rows - ss_cols

    ms_r = ss_rows / (n - 1)
    ms_c = ss_cols / (k - 1)
    ms_e = ss_err / ((n - 1) * (k - 1))

    denom = ms_r + (k - 1) * ms_e + (k / n) * (ms_c - ms_e)
    if denom == 0.0:
        return 1.0
    return float((ms_r - ms_e) / denom)
