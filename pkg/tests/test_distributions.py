import math
from itertools import combinations

import numpy as np
import pytest
from scipy import stats

from modelcred.distributions import (
    ChiSquare,
    Logistic,
    Normal,
    NoncentralChiSquare,
    SeedSpec,
    cdf,
    overlap_pmf,
    quantile,
    sample,
    survival,
)

FAMILIES = [
    Normal(0.0, 1.0),
    Normal(-2.0, 3.5),
    Logistic(0.0, 1.0),
    Logistic(1.0, 0.4),
    ChiSquare(1),
    ChiSquare(9),
    ChiSquare(25),
    NoncentralChiSquare(9, 8.81),
    NoncentralChiSquare(25, 13.47),
]


def test_chi2_quantile_printed_values():
    assert quantile(ChiSquare(25), 0.95) == pytest.approx(37.66, abs=0.01)
    # independent oracle: bisection on the regularized-gamma CDF
    lo, hi = 0.0, 100.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if stats.chi2.cdf(mid, 9) < 0.95:
            lo = mid
        else:
            hi = mid
    assert quantile(ChiSquare(9), 0.95) == pytest.approx(lo, abs=1e-3)
    assert quantile(ChiSquare(9), 0.95) == pytest.approx(16.919, abs=1e-3)


def test_chi2_quantile_at_zero():
    assert quantile(ChiSquare(9), 0.0) == 0.0
    assert quantile(NoncentralChiSquare(9, 5.0), 0.0) == 0.0


def test_noncentral_zero_lambda_reduces_to_central():
    for x in [0.5, 3.0, 9.0, 20.0]:
        assert cdf(NoncentralChiSquare(9, 0.0), x) == pytest.approx(
            cdf(ChiSquare(9), x), abs=1e-12
        )


def test_chi2_cdf_at_zero():
    assert cdf(ChiSquare(9), 0.0) == 0.0


def test_noncentral_cdf_against_scipy_oracle():
    for df, lam in [(5, 1.0), (9, 8.81), (12, 9.9), (25, 13.47), (3, 40.0)]:
        for x in [1.0, df / 2, float(df), df + lam, df + lam + 10]:
            assert cdf(NoncentralChiSquare(df, lam), x) == pytest.approx(
                stats.ncx2.cdf(x, df, lam), abs=1e-9
            )


def test_noncentral_half_power_round_trip():
    # the lambda calibrated to power 0.5 puts mass 0.5 above the critical value
    from modelcred.categorical import solve_delta_star

    lam = solve_delta_star(9, 0.05)
    crit = quantile(ChiSquare(9), 0.95)
    assert cdf(NoncentralChiSquare(9, lam), crit) == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize("family", FAMILIES, ids=str)
def test_quantile_cdf_round_trip(family):
    for p in np.arange(0.01, 1.0, 0.07):
        q = quantile(family, float(p))
        assert cdf(family, q) == pytest.approx(p, abs=1e-8)


def test_quantile_monotone_in_p():
    for family in FAMILIES:
        qs = [quantile(family, p) for p in np.linspace(0.02, 0.98, 25)]
        assert all(a < b for a, b in zip(qs, qs[1:]))


def test_quantile_domain_errors():
    with pytest.raises(ValueError):
        quantile(Normal(), 1.2)
    with pytest.raises(ValueError):
        quantile(Normal(), 0.0)  # p=0 only allowed for chi-square kinds


def test_cdf_rejects_non_finite():
    with pytest.raises(ValueError):
        cdf(Normal(), math.nan)
    with pytest.raises(ValueError):
        cdf(ChiSquare(5), math.inf)


def test_noncentral_monotone_in_lambda_and_x():
    xs = np.linspace(0.5, 40.0, 12)
    lams = [0.0, 1.0, 4.0, 9.0, 20.0]
    for x in xs:
        vals = [cdf(NoncentralChiSquare(9, lam), float(x)) for lam in lams]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    for lam in lams:
        vals = [cdf(NoncentralChiSquare(9, lam), float(x)) for x in xs]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_survival_complements_cdf():
    for family in FAMILIES:
        for x in [0.5, 2.0, 10.0]:
            assert survival(family, x) == pytest.approx(1.0 - cdf(family, x), abs=1e-10)


def test_sample_determinism():
    seed = SeedSpec(123, 5)
    a = sample(Normal(), 100, seed)
    b = sample(Normal(), 100, seed)
    assert np.array_equal(a, b)
    c = sample(Normal(), 100, SeedSpec(123, 6))
    assert not np.array_equal(a, c)


def test_normal_sample_mean_lln():
    x = sample(Normal(0, 1), 10**6, SeedSpec(7))
    assert abs(x.mean()) < 4 / math.sqrt(10**6)


def test_logistic_sample_variance():
    x = sample(Logistic(0, 1), 10**6, SeedSpec(11))
    assert x.var() == pytest.approx(math.pi**2 / 3, rel=0.02)


def test_logistic_sample_matches_inverse_cdf_distribution():
    # probability transform of the sample should be uniform
    x = sample(Logistic(2.0, 0.5), 5000, SeedSpec(3))
    u = np.array([cdf(Logistic(2.0, 0.5), v) for v in x[:500]])
    d = stats.kstest(u, "uniform").statistic
    assert d < 1.63 / math.sqrt(500)  # alpha = 0.01


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Normal(0, 0)
    with pytest.raises(ValueError):
        Logistic(0, -1)
    with pytest.raises(ValueError):
        ChiSquare(0)
    with pytest.raises(ValueError):
        NoncentralChiSquare(3, -0.5)


def test_overlap_pmf_small_enumeration_oracle():
    # all ordered pairs of 2-subsets of {1,2,3,4}
    subsets = list(combinations(range(4), 2))
    hits = sum(
        1 for s1 in subsets for s2 in subsets if len(set(s1) & set(s2)) == 2
    )
    assert overlap_pmf(4, 2, 2) == pytest.approx(hits / 36, abs=1e-12)
    for k in (0, 1):
        hits = sum(
            1 for s1 in subsets for s2 in subsets if len(set(s1) & set(s2)) == k
        )
        assert overlap_pmf(4, 2, k) == pytest.approx(hits / 36, abs=1e-12)


def test_overlap_pmf_normalizes():
    total = sum(overlap_pmf(20, 7, k) for k in range(0, 8))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_overlap_pmf_mean_is_m_squared_over_n():
    for n, m in [(50, 20), (200, 80), (30, 30)]:
        mean = sum(k * overlap_pmf(n, m, k) for k in range(0, m + 1))
        assert mean == pytest.approx(m * m / n, abs=1e-9)


def test_overlap_mean_fraction_at_table4_design():
    mean = sum(k * overlap_pmf(1000, 485, k) for k in range(0, 486))
    assert mean / 485 == pytest.approx(0.485, abs=1e-9)


def test_overlap_pmf_outside_support_and_errors():
    assert overlap_pmf(10, 4, 5) == 0.0
    assert overlap_pmf(10, 8, 3) == 0.0  # below max(0, 2m-n) = 6
    with pytest.raises(ValueError):
        overlap_pmf(5, 6, 1)


def test_seedspec_validation_and_child():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    s = SeedSpec(3, 10)
    assert s.child(5) == SeedSpec(3, 15)
