"""U-statistic variance theory and equivalent-independent-sample-size (EISS)
diagnostics for subsampling power estimators.

The subsampling power estimate is an incomplete version of the complete
U-statistic that averages the rejection indicator over all size-m subsets.
Overlap between subsets degrades its variance; EISS expresses that variance as
the size of an i.i.d. Bernoulli experiment of equal accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy import special

from .distributions import ChiSquare, DistributionFamily, SeedSpec, quantile, sample
from .goftests import TestSpec
from .resampling import STREAM_BLOCK, estimate_power

__all__ = [
    "LocalAltSpec",
    "VarianceReport",
    "MonteCarloValue",
    "EstimatorDistribution",
    "ucomp_variance_exact",
    "ucomp_small_oracle",
    "variance_bound",
    "local_alt_A",
    "eiss_local",
    "simulate_estimator_distribution",
]

_ORACLE_BUDGET = 1_000_000


@dataclass(frozen=True)
class LocalAltSpec:
    """Ingredients of the local-alternative overlap calculation."""

    d: int  # chi-square degrees of freedom of the test statistic
    delta: float  # local noncentrality scale
    c_alpha: float  # critical value
    a: float  # overlap fraction between the two subsets
    draws: int = 200_000

    def __post_init__(self):
        if not (0 <= self.a < 1):
            raise ValueError("overlap fraction a must lie in [0, 1)")
        if self.c_alpha <= 0:
            raise ValueError("c_alpha must be positive")
        if self.d < 2:
            raise ValueError("d must be >= 2")


@dataclass(frozen=True)
class MonteCarloValue:
    value: float
    std_error: float


@dataclass(frozen=True)
class VarianceReport:
    variance: float
    eiss: float
    bound_phi_inv: float
    mc_std_error: float


@dataclass(frozen=True)
class EstimatorDistribution:
    mean: float
    sd: float
    eiss_empirical: float


def ucomp_variance_exact(sigma_sq: Sequence[float], n: int, m: int) -> float:
    """Exact variance of the complete U-statistic from conditional variances.

    sum_i C(m,i) C(n-m,m-i) sigma2_i / C(n,m), log-space weights.
    """
    sigma_sq = np.asarray(sigma_sq, dtype=float)
    if sigma_sq.size != m:
        raise ValueError("need one conditional variance per kernel argument")
    if np.any(sigma_sq < 0):
        raise ValueError("conditional variances must be nonnegative")
    if m > n:
        raise ValueError("m must be <= n")
    i = np.arange(1, m + 1)
    log_w = (
        _log_choose(m, i)
        + _log_choose(n - m, m - i)
        - _log_choose(n, m)
    )
    valid = m - i <= n - m
    return float(np.sum(np.exp(log_w[valid]) * sigma_sq[valid]))


def _log_choose(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def ucomp_small_oracle(data, kernel: Callable[[np.ndarray], float], m: int) -> float:
    """Exact average of the kernel over every size-m subset of the data.

    Feasible only for small problems; refuses more than 10^6 subsets.
    """
    data = np.asarray(data, dtype=float)
    n = data.size
    if m > n:
        raise ValueError("m must be <= n")
    if math.comb(n, m) > _ORACLE_BUDGET:
        raise ValueError(f"C({n},{m}) exceeds the enumeration budget")
    total = 0.0
    count = 0
    for idx in combinations(range(n), m):
        total += kernel(data[list(idx)])
        count += 1
    return total / count


def variance_bound(beta: float, n: int, m: int) -> float:
    """Upper bound beta(1-beta) * m/n on the complete U-statistic variance."""
    if m > n:
        raise ValueError("m must be <= n")
    if not (0 <= beta <= 1):
        raise ValueError("beta must lie in [0, 1]")
    return beta * (1.0 - beta) * m / n


def _g_survival(d: int, t: np.ndarray) -> np.ndarray:
    """G(t) = P{chi2_{d-1} > t}, extended by G(t) = 1 for t <= 0."""
    return special.chdtrc(d - 1, np.clip(t, 0.0, None))


def local_alt_A(spec: LocalAltSpec, seed: SeedSpec = SeedSpec(0)) -> MonteCarloValue:
    """Monte Carlo estimate of the limiting cross-moment A at fixed overlap.

    A is the expectation of the product of two survival factors sharing the
    overlap variables Z (normal) and W (chi-square, d-1 df), with independent
    standard normals X and Y one per factor.
    """
    rng = seed.generator()
    a, d, c = spec.a, spec.d, spec.c_alpha
    x = rng.standard_normal(spec.draws)
    y = rng.standard_normal(spec.draws)
    z = rng.standard_normal(spec.draws)
    w = rng.chisquare(d - 1, spec.draws)
    r = a / (1.0 - a)
    shift = z * math.sqrt(r) + spec.delta / math.sqrt(1.0 - a)
    s = np.sqrt(shift**2 + r * w)
    g1 = _g_survival(d, c / (1.0 - a) - (x + s) ** 2)
    g2 = _g_survival(d, c / (1.0 - a) - (y + s) ** 2)
    prod = g1 * g2
    return MonteCarloValue(
        value=float(prod.mean()),
        std_error=float(prod.std(ddof=1) / math.sqrt(spec.draws)),
    )


def _conditional_factor_means(spec: LocalAltSpec, seed: SeedSpec, nodes: int = 61) -> np.ndarray:
    """Per-draw conditional mean h(Z, W) of one survival factor.

    Conditional on the shared overlap variables (Z, W) the two factors are
    i.i.d. over X and Y, so A = E[h^2]; integrating X by Gauss-Hermite
    quadrature leaves only the (Z, W) Monte Carlo noise.
    """
    rng = seed.generator()
    a, d, c = spec.a, spec.d, spec.c_alpha
    xg, wg = hermgauss(nodes)
    xg = xg * math.sqrt(2.0)
    wg = wg / math.sqrt(math.pi)
    z = rng.standard_normal(spec.draws)
    w = rng.chisquare(d - 1, spec.draws)
    r = a / (1.0 - a)
    shift = z * math.sqrt(r) + spec.delta / math.sqrt(1.0 - a)
    s = np.sqrt(shift**2 + r * w)
    t = c / (1.0 - a) - (xg[None, :] + s[:, None]) ** 2
    return _g_survival(d, t) @ wg


def eiss_local(
    phi: float,
    d: int,
    alpha: float,
    delta: float,
    draws: int = 200_000,
    seed: SeedSpec = SeedSpec(0),
) -> VarianceReport:
    """EISS of the subsampling power estimator at sampling fraction phi.

    The fractional overlap between two subsets concentrates at phi, so the
    cross-moment A is evaluated at a = phi; with delta calibrated to power 0.5
    the estimator variance is A - 0.25 and EISS = 0.25 / (A - 0.25).  A is
    estimated as the mean square of the conditional factor mean h(Z, W), a
    Rao-Blackwellized form of the plain product average with far smaller
    Monte Carlo error at small overlap.

    Raises RuntimeError when A - 0.25 is not resolved above the Monte Carlo
    error; at very small phi the calibration offset 2 * (E[h] - 0.5) * 0.5
    can dominate the overlap signal, which no number of draws repairs.
    """
    if not (0 < phi < 1):
        raise ValueError("phi must lie in (0, 1)")
    c_alpha = quantile(ChiSquare(d), 1.0 - alpha)
    spec = LocalAltSpec(d=d, delta=delta, c_alpha=c_alpha, a=phi, draws=draws)
    h = _conditional_factor_means(spec, seed)
    hsq = h**2
    variance = float(hsq.mean()) - 0.25
    std_error = float(hsq.std(ddof=1)) / math.sqrt(draws)
    if variance <= std_error:
        raise RuntimeError(
            f"variance {variance:.3g} not resolved above MC error "
            f"{std_error:.3g}; draws too few for this sampling fraction"
        )
    return VarianceReport(
        variance=variance,
        eiss=0.25 / variance,
        bound_phi_inv=1.0 / phi,
        mc_std_error=std_error,
    )


def simulate_estimator_distribution(
    truth: DistributionFamily,
    n: int,
    m: int,
    datasets: int,
    replicates: int,
    scheme: str,
    spec: TestSpec,
    seed: SeedSpec = SeedSpec(0),
    jobs: int = 1,
) -> EstimatorDistribution:
    """Distribution of the power estimate across independent datasets.

    Each dataset of size n is drawn from the truth, its power estimate at m is
    computed by the given scheme, and the spread across datasets yields the
    empirical EISS mean(1-mean)/sd^2.
    """
    if datasets < 50:
        raise ValueError("datasets must be >= 50")
    betas = np.empty(datasets)
    for ds in range(datasets):
        block = ds * STREAM_BLOCK
        data = sample(truth, n, seed.child(block))
        point = estimate_power(
            data, spec, m, replicates, scheme, seed,
            jobs=jobs, stream_offset=block + 1,
        )
        betas[ds] = point.beta_hat
    mean = float(betas.mean())
    sd = float(betas.std(ddof=1))
    return EstimatorDistribution(
        mean=mean, sd=sd, eiss_empirical=mean * (1.0 - mean) / sd**2
    )
