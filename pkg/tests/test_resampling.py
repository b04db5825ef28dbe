import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelcred.distributions import Logistic, Normal, SeedSpec, sample
from modelcred.goftests import (
    ESTIMATED_NORMAL,
    KS_ONE_SAMPLE,
    KS_TWO_SAMPLE,
    SHAPIRO_WILK,
    TestSpec,
)
from modelcred.resampling import (
    BOOTSTRAP,
    SUBSAMPLE,
    PowerEstimationError,
    PowerPoint,
    draw_bootstrap,
    draw_subsample,
    estimate_power,
    power_curve,
)


def test_powerpoint_invariants():
    p = PowerPoint(m=10, replicates=400, rejections=100)
    assert p.beta_hat == 0.25
    assert p.std_error == pytest.approx(math.sqrt(0.25 * 0.75 / 400))


def test_subsample_full_size_is_permutation():
    data = np.arange(20.0)
    out = draw_subsample(data, 20, SeedSpec(1))
    assert sorted(out) == sorted(data)


def test_subsample_distinct_indices_property():
    rng_seed = 0
    for n in (5, 17, 64, 100):
        for m in (1, n // 2, n):
            out = draw_subsample(np.arange(float(n)), m, SeedSpec(rng_seed))
            assert len(set(out.tolist())) == m
            rng_seed += 1


def test_subsample_uniformity_two_elements():
    counts = Counter()
    for s in range(10_000):
        v = draw_subsample(np.array([0.0, 1.0]), 1, SeedSpec(99, s))
        counts[v[0]] += 1
    assert abs(counts[0.0] - 5000) < 200


def test_subsample_errors():
    with pytest.raises(ValueError):
        draw_subsample(np.arange(5.0), 6, SeedSpec(0))
    with pytest.raises(ValueError):
        draw_subsample(np.arange(5.0), 0, SeedSpec(0))


def test_bootstrap_single_value():
    out = draw_bootstrap(np.array([3.25]), 7, SeedSpec(0))
    assert np.all(out == 3.25) and out.size == 7


def test_bootstrap_distinct_fraction():
    n = 1000
    data = np.arange(float(n))
    fracs = [
        np.unique(draw_bootstrap(data, n, SeedSpec(5, s))).size / n
        for s in range(200)
    ]
    assert np.mean(fracs) == pytest.approx(1 - (1 - 1 / n) ** n, abs=0.02)


def test_draw_determinism():
    data = np.arange(50.0)
    assert np.array_equal(
        draw_subsample(data, 10, SeedSpec(4, 2)), draw_subsample(data, 10, SeedSpec(4, 2))
    )
    assert np.array_equal(
        draw_bootstrap(data, 10, SeedSpec(4, 2)), draw_bootstrap(data, 10, SeedSpec(4, 2))
    )


def test_estimate_power_full_subsample_matches_full_decision():
    data = sample(Logistic(0, 1), 300, SeedSpec(8))
    spec = TestSpec(test=SHAPIRO_WILK, alpha=0.05)
    point = estimate_power(data, spec, 300, 50, SUBSAMPLE, SeedSpec(1))
    from modelcred.goftests import shapiro_wilk

    full = shapiro_wilk(data, 0.05).reject
    assert point.beta_hat == (1.0 if full else 0.0)


def test_estimate_power_null_data_near_alpha():
    data = sample(Normal(0, 1), 4000, SeedSpec(21))
    spec = TestSpec(test=KS_ONE_SAMPLE, alpha=0.05, null=ESTIMATED_NORMAL)
    point = estimate_power(data, spec, 500, 400, SUBSAMPLE, SeedSpec(2))
    assert abs(point.beta_hat - 0.05) < 3 * math.sqrt(0.05 * 0.95 / 400) + 0.01


def test_determinism_across_thread_counts():
    data = sample(Logistic(0, 1), 2000, SeedSpec(31))
    spec = TestSpec(test=KS_ONE_SAMPLE, alpha=0.05, null=ESTIMATED_NORMAL)
    results = [
        estimate_power(data, spec, 300, 200, SUBSAMPLE, SeedSpec(3), jobs=j)
        for j in (1, 4, 16)
    ]
    assert results[0] == results[1] == results[2]


def test_two_sample_power_draws_fresh_model_sample():
    matched = Normal(0.0, math.pi / math.sqrt(3.0))
    data = sample(Logistic(0, 1), 5000, SeedSpec(12))
    spec = TestSpec(test=KS_TWO_SAMPLE, alpha=0.05, null=matched)
    p1 = estimate_power(data, spec, 200, 200, SUBSAMPLE, SeedSpec(4))
    p2 = estimate_power(data, spec, 200, 200, SUBSAMPLE, SeedSpec(4))
    assert p1 == p2
    assert 0.0 <= p1.beta_hat <= 1.0


def test_error_budget_enforced():
    # constant data: estimated-normal KS errors on every replicate
    data = np.ones(100)
    spec = TestSpec(test=KS_ONE_SAMPLE, alpha=0.05, null=ESTIMATED_NORMAL)
    with pytest.raises(PowerEstimationError):
        estimate_power(data, spec, 50, 100, SUBSAMPLE, SeedSpec(0))


def test_power_curve_single_point_equals_estimate_power():
    data = sample(Logistic(0, 1), 1000, SeedSpec(44))
    spec = TestSpec(test=SHAPIRO_WILK, alpha=0.05)
    curve = power_curve(data, spec, [200], 100, SUBSAMPLE, SeedSpec(5))
    point = estimate_power(data, spec, 200, 100, SUBSAMPLE, SeedSpec(5))
    assert curve.points == (point,)


def test_power_curve_grid_validation():
    data = np.arange(100.0)
    spec = TestSpec(test=SHAPIRO_WILK, alpha=0.05)
    with pytest.raises(ValueError):
        power_curve(data, spec, [], 10, SUBSAMPLE, SeedSpec(0))
    with pytest.raises(ValueError):
        power_curve(data, spec, [50, 50], 10, SUBSAMPLE, SeedSpec(0))


def test_power_curve_statistically_monotone_for_false_model():
    data = sample(Logistic(0, 1), 6000, SeedSpec(55))
    spec = TestSpec(test=KS_ONE_SAMPLE, alpha=0.05, null=ESTIMATED_NORMAL)
    curve = power_curve(data, spec, [100, 400, 1600, 6000], 300, SUBSAMPLE, SeedSpec(6))
    pts = list(curve)
    for a, b in zip(pts, pts[1:]):
        assert a.beta_hat <= b.beta_hat + 3 * (a.std_error + b.std_error)


def test_subsampling_unbiasedness_nested():
    # mean of beta_hat(m) over datasets matches a direct i.i.d. power oracle
    spec = TestSpec(test=SHAPIRO_WILK, alpha=0.05)
    m, n = 60, 240
    datasets = 150
    inner = 60
    means = []
    for ds in range(datasets):
        data = sample(Logistic(0, 1), n, SeedSpec(70, 2 * ds))
        p = estimate_power(data, spec, m, inner, SUBSAMPLE, SeedSpec(70, 2 * ds + 1))
        means.append(p.beta_hat)
    nested = float(np.mean(means))
    from modelcred.goftests import shapiro_wilk

    direct = np.mean(
        [
            shapiro_wilk(sample(Logistic(0, 1), m, SeedSpec(71, i)), 0.05).reject
            for i in range(3000)
        ]
    )
    se = math.sqrt(np.var(means) / datasets + direct * (1 - direct) / 3000)
    assert abs(nested - direct) < 3 * se + 0.01


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=2**32))
def test_subsample_is_subset_property(m, seed):
    data = np.arange(40.0)
    out = draw_subsample(data, m, SeedSpec(seed))
    assert set(out.tolist()) <= set(data.tolist())
    assert out.size == m
