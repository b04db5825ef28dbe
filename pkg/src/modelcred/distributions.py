"""Distribution families, special-function CDFs/quantiles, seeded samplers.

Everything here is pure: samplers take an explicit :class:`SeedSpec` and hold
no shared mutable state, so all functions are safe to call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize, special

__all__ = [
    "Normal",
    "Logistic",
    "ChiSquare",
    "NoncentralChiSquare",
    "DistributionFamily",
    "SeedSpec",
    "cdf",
    "quantile",
    "sample",
    "overlap_pmf",
]

_U64 = 2**64


@dataclass(frozen=True)
class Normal:
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("normal scale must be positive")


@dataclass(frozen=True)
class Logistic:
    """Logistic(location, scale) with CDF 1/(1+exp(-(x-loc)/scale)).

    Variance is scale**2 * pi**2 / 3.
    """

    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("logistic scale must be positive")


@dataclass(frozen=True)
class ChiSquare:
    df: int

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 1:
            raise ValueError("df must be a positive integer")


@dataclass(frozen=True)
class NoncentralChiSquare:
    df: int
    noncentrality: float

    def __post_init__(self):
        if int(self.df) != self.df or self.df < 1:
            raise ValueError("df must be a positive integer")
        if self.noncentrality < 0:
            raise ValueError("noncentrality must be nonnegative")


DistributionFamily = Union[Normal, Logistic, ChiSquare, NoncentralChiSquare]


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic identity of one random stream.

    Distinct ``stream_id`` values yield statistically independent streams;
    replicate ``b`` of a job conventionally uses ``base.child(b)``, so results
    do not depend on execution order or worker count.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed < _U64 and 0 <= self.stream_id < _U64):
            raise ValueError("seed components must be 64-bit unsigned integers")

    def child(self, offset: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, (self.stream_id + offset) % _U64)

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence([self.master_seed, self.stream_id])
        )


def _chi2_cdf(df: float, x) -> np.ndarray:
    return special.gammainc(df / 2.0, np.asarray(x, dtype=float) / 2.0)


def _noncentral_chi2_cdf(df: int, lam: float, x: float, tol: float = 1e-12) -> float:
    """Poisson mixture of central chi-square CDFs.

    Terms are added until the remaining Poisson tail mass drops below ``tol``;
    since each central CDF term is <= 1, the truncation error is below ``tol``.
    """
    if x <= 0:
        return 0.0
    if lam == 0:
        return float(_chi2_cdf(df, x))
    half = lam / 2.0
    log_w = -half  # log Poisson weight at j=0
    total = 0.0
    remaining = 1.0
    j = 0
    while remaining > tol:
        w = math.exp(log_w)
        total += w * float(_chi2_cdf(df + 2 * j, x))
        remaining -= w
        j += 1
        log_w += math.log(half) - math.log(j)
        if j > 100000:  # pragma: no cover - defensive
            raise RuntimeError("noncentral chi-square series failed to converge")
    return min(total, 1.0)


def cdf(family: DistributionFamily, x: float) -> float:
    """Cumulative distribution function of ``family`` at ``x``."""
    if isinstance(x, (int, float)) and not math.isfinite(x):
        raise ValueError("x must be finite")
    if isinstance(family, Normal):
        return float(special.ndtr((x - family.location) / family.scale))
    if isinstance(family, Logistic):
        return float(special.expit((x - family.location) / family.scale))
    if isinstance(family, ChiSquare):
        return float(_chi2_cdf(family.df, max(x, 0.0)))
    if isinstance(family, NoncentralChiSquare):
        return _noncentral_chi2_cdf(family.df, family.noncentrality, x)
    raise TypeError(f"unknown family: {family!r}")


def survival(family: DistributionFamily, x: float) -> float:
    if isinstance(family, ChiSquare):
        if x <= 0:
            return 1.0
        return float(special.gammaincc(family.df / 2.0, x / 2.0))
    return 1.0 - cdf(family, x)


def quantile(family: DistributionFamily, p: float) -> float:
    """Inverse CDF; ``p=0`` is allowed for the chi-square families (gives 0)."""
    chi_like = isinstance(family, (ChiSquare, NoncentralChiSquare))
    if not (0 < p < 1) and not (p == 0 and chi_like):
        raise ValueError("p must be in (0, 1)")
    if isinstance(family, Normal):
        return family.location + family.scale * float(special.ndtri(p))
    if isinstance(family, Logistic):
        return family.location + family.scale * math.log(p / (1.0 - p))
    if isinstance(family, ChiSquare):
        if p == 0:
            return 0.0
        return 2.0 * float(special.gammaincinv(family.df / 2.0, p))
    if isinstance(family, NoncentralChiSquare):
        if p == 0:
            return 0.0
        hi = family.df + family.noncentrality + 10.0
        while _noncentral_chi2_cdf(family.df, family.noncentrality, hi) < p:
            hi *= 2.0
        return float(
            optimize.brentq(
                lambda t: _noncentral_chi2_cdf(family.df, family.noncentrality, t) - p,
                0.0,
                hi,
                xtol=1e-11,
                rtol=1e-13,
            )
        )
    raise TypeError(f"unknown family: {family!r}")


def sample(family: DistributionFamily, count: int, seed: SeedSpec) -> np.ndarray:
    """Draw ``count`` i.i.d. values; deterministic given ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = seed.generator()
    return sample_with(family, count, rng)


def sample_with(family: DistributionFamily, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(family, Normal):
        return rng.normal(family.location, family.scale, count)
    if isinstance(family, Logistic):
        # inverse-CDF sampling
        u = rng.random(count)
        return family.location + family.scale * np.log(u / (1.0 - u))
    if isinstance(family, ChiSquare):
        return rng.chisquare(family.df, count)
    if isinstance(family, NoncentralChiSquare):
        if family.noncentrality == 0:
            return rng.chisquare(family.df, count)
        return rng.noncentral_chisquare(family.df, family.noncentrality, count)
    raise TypeError(f"unknown family: {family!r}")


def overlap_pmf(n: int, m: int, k: int) -> float:
    """Probability that two independent size-m subsets of {1..n} share k elements.

    Hypergeometric: C(m,k) C(n-m,m-k) / C(n,m), evaluated in log space.
    """
    if m > n:
        raise ValueError("m must be <= n")
    if k < max(0, 2 * m - n) or k > m:
        return 0.0
    log_p = (
        _log_choose(m, k)
        + _log_choose(n - m, m - k)
        - _log_choose(n, m)
    )
    return math.exp(log_p)


def _log_choose(n: int, k: int) -> float:
    return float(
        special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    )
