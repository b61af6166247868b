import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raycut.evaluation import (
    DegenerateSampleError,
    EvalRecord,
    UndefinedDistanceError,
    boundary_points,
    dice,
    hausdorff,
    icc_absolute_agreement,
    one_sample_ttest,
    summarize,
    wilcoxon_rank_sum,
)
from raycut.imaging import BinaryMask


def random_mask(rng, h=16, w=16, p=0.4, nonempty=False):
    bits = rng.uniform(size=(h, w)) < p
    if nonempty and not bits.any():
        bits[rng.integers(0, h), rng.integers(0, w)] = True
    return BinaryMask(bits)


# ---------------------------------------------------------------------------
# Dice
# ---------------------------------------------------------------------------


def test_dice_trivials():
    rng = np.random.default_rng(1)
    a = random_mask(rng, nonempty=True)
    assert dice(a, a) == 1.0
    left = BinaryMask(np.pad(np.ones((4, 4), bool), ((0, 0), (0, 12))))
    right = BinaryMask(np.pad(np.ones((4, 4), bool), ((0, 0), (12, 0))))
    assert dice(left, right) == 0.0


def test_dice_half_overlap():
    a = np.zeros((10, 20), bool)
    b = np.zeros((10, 20), bool)
    a[:, 0:10] = True  # |A| = 100
    b[:, 5:15] = True  # |B| = 100, |A n B| = 50
    assert dice(BinaryMask(a), BinaryMask(b)) == 0.5


def test_dice_both_empty_is_one():
    empty = BinaryMask(np.zeros((5, 5), bool))
    assert dice(empty, empty) == 1.0


def test_dice_dimension_mismatch():
    with pytest.raises(ValueError):
        dice(BinaryMask(np.zeros((4, 4), bool)), BinaryMask(np.zeros((4, 5), bool)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_dice_symmetric(seed):
    rng = np.random.default_rng(seed)
    a = random_mask(rng)
    b = random_mask(rng)
    assert dice(a, b) == dice(b, a)


# ---------------------------------------------------------------------------
# Hausdorff
# ---------------------------------------------------------------------------


def boundary_oracle(mask: BinaryMask):
    """Definitional boundary: foreground with a background 4-neighbor or on
    the raster edge."""
    pts = []
    h, w = mask.bits.shape
    for y in range(h):
        for x in range(w):
            if not mask.bits[y, x]:
                continue
            on_edge = x == 0 or y == 0 or x == w - 1 or y == h - 1
            nb_bg = any(
                not mask.bits[ny, nx]
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1))
                if 0 <= ny < h and 0 <= nx < w
            )
            if on_edge or nb_bg:
                pts.append((x, y))
    return pts


def hausdorff_oracle(a: BinaryMask, b: BinaryMask) -> float:
    pa = boundary_oracle(a)
    pb = boundary_oracle(b)
    h_ab = max(min(math.dist(p, q) for q in pb) for p in pa)
    h_ba = max(min(math.dist(p, q) for q in pa) for p in pb)
    return max(h_ab, h_ba)


def test_hausdorff_identical_masks():
    rng = np.random.default_rng(2)
    a = random_mask(rng, nonempty=True)
    assert hausdorff(a, a) == 0.0


def test_hausdorff_three_four_five():
    a = np.zeros((8, 8), bool)
    b = np.zeros((8, 8), bool)
    a[0, 0] = True
    b[4, 3] = True  # (x=3, y=4): distance 5 from (0, 0)
    assert hausdorff(BinaryMask(a), BinaryMask(b)) == 5.0


def test_hausdorff_empty_mask_error():
    a = BinaryMask(np.zeros((4, 4), bool))
    b = BinaryMask(np.ones((4, 4), bool))
    with pytest.raises(UndefinedDistanceError):
        hausdorff(a, b)


def test_hausdorff_matches_bruteforce_100_pairs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = random_mask(rng, nonempty=True)
        b = random_mask(rng, nonempty=True)
        assert hausdorff(a, b) == pytest.approx(hausdorff_oracle(a, b), abs=1e-9)


def test_boundary_points_match_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m = random_mask(rng, nonempty=True)
        got = sorted(map(tuple, boundary_points(m).astype(int)))
        assert got == sorted(boundary_oracle(m))


def test_hausdorff_symmetry_and_triangle():
    rng = np.random.default_rng(5)
    a = random_mask(rng, nonempty=True)
    b = random_mask(rng, nonempty=True)
    c = random_mask(rng, nonempty=True)
    assert hausdorff(a, b) == hausdorff(b, a)
    assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-9


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------


def test_summarize_singleton():
    s = summarize([5.0])
    assert s.median == s.min == s.max == 5.0
    assert (s.ci_low, s.ci_high) == (5.0, 5.0)


def test_summarize_odd_quartiles():
    s = summarize([1, 2, 3, 4, 5])
    assert (s.q1, s.median, s.q3) == (2.0, 3.0, 4.0)
    assert (s.min, s.max, s.n) == (1.0, 5.0, 5)


def test_summarize_ci_brackets_median_and_is_deterministic():
    rng = np.random.default_rng(6)
    x = rng.normal(10, 2, size=60)
    s1 = summarize(x, rng_seed=42)
    s2 = summarize(x, rng_seed=42)
    assert (s1.ci_low, s1.ci_high) == (s2.ci_low, s2.ci_high)
    assert s1.ci_low <= s1.median <= s1.ci_high
    s3 = summarize(x, rng_seed=43)
    assert (s1.ci_low, s1.ci_high) != (s3.ci_low, s3.ci_high)


def test_summarize_empty_rejected():
    with pytest.raises(ValueError):
        summarize([])


# ---------------------------------------------------------------------------
# Rank-sum test
# ---------------------------------------------------------------------------


def wilcoxon_exact_oracle(x, y):
    """Two-sided p by literally enumerating every group assignment of the
    pooled sample (valid without ties)."""
    pooled = list(x) + list(y)
    m = len(x)
    u_obs = sum(1 for a in x for b in y if a > b)
    us = []
    for idx in itertools.combinations(range(len(pooled)), m):
        chosen = [pooled[i] for i in idx]
        rest = [pooled[i] for i in range(len(pooled)) if i not in idx]
        us.append(sum(1 for a in chosen for b in rest if a > b))
    us = np.array(us)
    p_le = np.mean(us <= u_obs)
    p_ge = np.mean(us >= u_obs)
    return min(1.0, 2.0 * min(p_le, p_ge))


def test_wilcoxon_identical_lists():
    x = [3.0, 1.0, 4.0, 1.5, 5.0]
    u, p = wilcoxon_rank_sum(x, list(x))
    assert p > 0.9


def test_wilcoxon_separated_exact():
    u, p = wilcoxon_rank_sum([1, 2, 3], [10, 11, 12])
    assert u == 0.0
    assert p == pytest.approx(0.1, abs=1e-15)


def test_wilcoxon_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(2, 13 - m))
        # continuous draws: ties have probability zero
        x = rng.normal(size=m)
        y = rng.normal(size=n)
        _, p = wilcoxon_rank_sum(x, y)
        assert p == pytest.approx(wilcoxon_exact_oracle(x, y), abs=1e-12)


def test_wilcoxon_large_sample_uses_normal_approximation():
    rng = np.random.default_rng(8)
    x = rng.normal(0, 1, size=40)
    y = rng.normal(1, 1, size=35)
    _, p = wilcoxon_rank_sum(x, y)
    assert 0.0 < p < 0.01


def test_wilcoxon_monotone_transform_invariant():
    rng = np.random.default_rng(9)
    x = rng.uniform(1, 5, size=8)
    y = rng.uniform(1, 5, size=9)
    _, p0 = wilcoxon_rank_sum(x, y)
    for f in (np.exp, np.sqrt, lambda v: v**3 + 2):
        _, p1 = wilcoxon_rank_sum(f(x), f(y))
        assert p1 == pytest.approx(p0, abs=1e-12)


def test_wilcoxon_empty_rejected():
    with pytest.raises(ValueError):
        wilcoxon_rank_sum([], [1.0])


# ---------------------------------------------------------------------------
# One-sample t-test
# ---------------------------------------------------------------------------


def t_sf_oracle(t, df):
    """Survival function of the t distribution via the regularized
    incomplete beta, evaluated with mpmath."""
    import mpmath

    x = df / (df + t * t)
    half = mpmath.betainc(df / 2, mpmath.mpf(1) / 2, 0, x, regularized=True) / 2
    return float(half) if t > 0 else 1.0 - float(half)


def test_ttest_mean_equals_mu0():
    t, p = one_sample_ttest([1.0, 2.0, 3.0], 2.0)
    assert t == 0.0
    assert p == 1.0


def test_ttest_textbook_example():
    t, p = one_sample_ttest([1.0, 2.0, 3.0], 0.0)
    assert t == pytest.approx(2.0 / (1.0 / math.sqrt(3.0)), abs=1e-12)
    assert t == pytest.approx(3.4641016, abs=1e-6)
    assert p == pytest.approx(2 * t_sf_oracle(t, 2), abs=1e-8)
    assert p == pytest.approx(0.0742, abs=5e-4)


def test_ttest_matches_beta_oracle():
    rng = np.random.default_rng(10)
    for _ in range(25):
        n = int(rng.integers(3, 30))
        x = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), size=n)
        t, p = one_sample_ttest(x, 0.0)
        assert p == pytest.approx(2 * t_sf_oracle(abs(t), n - 1), abs=1e-8)


def test_ttest_zero_variance_error():
    with pytest.raises(DegenerateSampleError):
        one_sample_ttest([0.0, 0.0], 0.0)


def test_ttest_scale_invariance():
    diffs = np.array([0.4, 1.1, -0.2, 0.9, 2.0])
    t0, p0 = one_sample_ttest(diffs, 0.0)
    for c in (0.25, 3.0, 117.0):
        t1, p1 = one_sample_ttest(diffs * c, 0.0)
        assert t1 == pytest.approx(t0, abs=1e-12)
        assert p1 == pytest.approx(p0, abs=1e-12)


# ---------------------------------------------------------------------------
# Intraclass correlation
# ---------------------------------------------------------------------------


def icc_oracle(y: np.ndarray) -> float:
    """Independent route: explicit effect estimates and residuals."""
    n, k = y.shape
    grand = y.mean()
    subject = y.mean(axis=1)
    rater = y.mean(axis=0)
    resid = np.empty_like(y)
    for i in range(n):
        for j in range(k):
            resid[i, j] = y[i, j] - subject[i] - rater[j] + grand
    ms_r = k * np.sum((subject - grand) ** 2) / (n - 1)
    ms_c = n * np.sum((rater - grand) ** 2) / (k - 1)
    ms_e = np.sum(resid**2) / ((n - 1) * (k - 1))
    denom = ms_r + (k - 1) * ms_e + k * (ms_c - ms_e) / n
    return (ms_r - ms_e) / denom if denom else 1.0


def test_icc_perfect_agreement():
    y = np.array([[1.0, 1.0], [2.0, 2.0], [3.5, 3.5], [0.5, 0.5]])
    assert icc_absolute_agreement(y) == pytest.approx(1.0, abs=1e-12)


def test_icc_offset_penalized():
    rng = np.random.default_rng(11)
    base = rng.normal(0, 0.1, size=5)
    y = np.column_stack([base, base + 10.0])
    icc = icc_absolute_agreement(y)
    assert icc == pytest.approx(icc_oracle(y), abs=1e-9)
    assert icc < 0.2


def test_icc_matches_anova_oracle():
    rng = np.random.default_rng(12)
    for _ in range(25):
        y = rng.normal(5, 2, size=(10, 2))
        assert icc_absolute_agreement(y) == pytest.approx(icc_oracle(y), abs=1e-9)


def test_icc_shift_all_invariant_but_one_rater_not():
    rng = np.random.default_rng(13)
    y = rng.normal(0, 1, size=(8, 2)) + rng.normal(0, 2, size=(8, 1))
    base = icc_absolute_agreement(y)
    assert icc_absolute_agreement(y + 7.3) == pytest.approx(base, abs=1e-9)
    shifted = y.copy()
    shifted[:, 1] += 5.0
    assert abs(icc_absolute_agreement(shifted) - base) > 0.05


def test_icc_constant_matrix_is_one():
    assert icc_absolute_agreement(np.full((4, 2), 3.0)) == 1.0


def test_icc_input_validation():
    with pytest.raises(ValueError):
        icc_absolute_agreement(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        icc_absolute_agreement(np.zeros((5, 3)))
    with pytest.raises(ValueError):
        icc_absolute_agreement(np.array([[1.0, np.nan], [2, 2], [3, 3]]))


# ---------------------------------------------------------------------------
# EvalRecord validation
# ---------------------------------------------------------------------------


def test_eval_record_validation():
    EvalRecord("ok", 0.9, 3.0, 1.0, 0.5, 17.2, 9.5, True)
    with pytest.raises(ValueError):
        EvalRecord("bad", 1.2, 3.0, 1.0, 0.5, 17.2, 9.5, True)
    with pytest.raises(ValueError):
        EvalRecord("bad", 0.9, -1.0, 1.0, 0.5, 17.2, 9.5, True)
    with pytest.raises(ValueError):
        EvalRecord("bad", 0.9, 3.0, 1.0, 0.5, 0.0, 9.5, True)
