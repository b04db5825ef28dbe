"""Credibility of the independence model for contingency tables.

Provides the likelihood-ratio machinery (deviance, Pearson distance), the two
closed-form index approximations, the noncentrality solver behind the second
approximation, multinomial resampling, and bootstrap confidence intervals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special

from .distributions import ChiSquare, NoncentralChiSquare, SeedSpec, cdf, quantile
from .goftests import TestResult
from .resampling import BOOTSTRAP, SUBSAMPLE, PowerCurve, PowerPoint
from .search import CredibilityEstimate, SearchConfig, search_curve

__all__ = [
    "ContingencyTable",
    "MultinomialFit",
    "fit_independence",
    "lrt_test",
    "solve_delta_star",
    "nstar_asy",
    "nstar_asy2",
    "multinomial_resample",
    "subsample_individuals",
    "estimate_power_categorical",
    "find_nstar_categorical",
    "bootstrap_ci_nstar_asy",
]


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # R x C nonnegative integers

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] < 2 or counts.shape[1] < 2:
            raise ValueError("counts must be an R x C grid with R, C >= 2")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.floor(counts)):
                raise ValueError("counts must be integers")
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> Tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class MultinomialFit:
    fitted: np.ndarray  # cell probabilities of the KL projection
    df: int
    g2: float  # deviance 2 sum o log(o / e)
    x2: float  # Pearson sum (o - e)^2 / e
    n: int

    @property
    def kl_rate(self) -> float:
        """Per-observation likelihood deviation to the fitted model, g2/(2n)."""
        return self.g2 / (2.0 * self.n)


def _independence_stats(counts: np.ndarray):
    """Deviance and Pearson statistic against the margin-product fit.

    Tolerates zero margins (empty rows/columns contribute nothing), which a
    small multinomial resample of a sparse table routinely produces; the
    user-facing fit rejects that case, the resampling kernel must not.
    """
    n = counts.sum()
    rows = counts.sum(axis=1, keepdims=True)
    cols = counts.sum(axis=0, keepdims=True)
    expected = rows * cols / n
    pos = counts > 0
    g2 = 2.0 * float(np.sum(counts[pos] * np.log(counts[pos] / expected[pos])))
    epos = expected > 0
    x2 = float(np.sum((counts[epos] - expected[epos]) ** 2 / expected[epos]))
    return g2, x2, expected / n


def independence_df(shape: Tuple[int, int]) -> int:
    return (shape[0] - 1) * (shape[1] - 1)


def fit_independence(table: ContingencyTable) -> MultinomialFit:
    """KL projection of the empirical cell distribution onto independence.

    The projection is the product of the observed margins; the deviance uses
    the 0 log 0 = 0 convention for empty cells.
    """
    counts = table.counts
    if np.any(counts.sum(axis=1) == 0) or np.any(counts.sum(axis=0) == 0):
        raise ValueError("independence fit undefined: zero row or column margin")
    g2, x2, fitted = _independence_stats(counts)
    return MultinomialFit(
        fitted=fitted, df=independence_df(table.shape), g2=g2, x2=x2, n=table.n
    )


def chisq_upper_point(df: int, alpha: float) -> float:
    """Critical value with upper tail probability alpha."""
    return quantile(ChiSquare(df), 1.0 - alpha)


def lrt_test(table: ContingencyTable, fit: MultinomialFit, alpha: float) -> TestResult:
    """Size-alpha likelihood ratio test of the fitted model."""
    crit = chisq_upper_point(fit.df, alpha)
    return TestResult(
        statistic=fit.g2, critical_value=crit, reject=fit.g2 > crit, df=fit.df
    )


def solve_delta_star(df: int, alpha: float, target_beta: float = 0.5) -> float:
    """Noncentrality at which the test's rejection probability hits the target.

    Solves P{noncentral chi2(df, lam) > upper-alpha point} = target_beta by
    root bracketing on the monotone power function.
    """
    if not (0 < alpha < target_beta <= 0.99):
        raise ValueError("need 0 < alpha < target_beta <= 0.99")
    crit = chisq_upper_point(df, alpha)

    def power_gap(lam: float) -> float:
        return (1.0 - cdf(NoncentralChiSquare(df, lam), crit)) - target_beta

    if power_gap(0.0) >= 0:
        return 0.0
    hi = 1.0
    while power_gap(hi) < 0:
        hi *= 2.0
    return float(optimize.brentq(power_gap, 0.0, hi, xtol=1e-10, rtol=1e-12))


def nstar_asy(table: ContingencyTable, fit: MultinomialFit, alpha: float) -> float:
    """First closed-form index approximation, from the deviance.

    n * chi2_df(upper alpha) / (2 * G2); infinite when the model fits exactly.
    """
    if fit.g2 == 0:
        return math.inf
    return table.n * chisq_upper_point(fit.df, alpha) / (2.0 * fit.g2)


def nstar_asy2(table: ContingencyTable, fit: MultinomialFit, alpha: float) -> float:
    """Second approximation, from the noncentral chi-square local analysis.

    The calibrated noncentrality divided by the per-observation Pearson
    distance X2 / n.
    """
    if fit.x2 == 0:
        return math.inf
    return table.n * solve_delta_star(fit.df, alpha) / fit.x2


def multinomial_resample(table: ContingencyTable, m: int, seed: SeedSpec) -> ContingencyTable:
    """One Multinomial(m, observed cell proportions) draw, margins not fixed."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed.generator()
    return _multinomial_draw(table, m, rng)


def _multinomial_draw(table, m, rng) -> ContingencyTable:
    probs = table.counts.ravel() / table.n
    draw = rng.multinomial(m, probs).reshape(table.shape)
    return ContingencyTable(counts=draw)


def subsample_individuals(table: ContingencyTable, m: int, seed: SeedSpec) -> ContingencyTable:
    """Draw m of the n categorized individuals without replacement."""
    if m > table.n:
        raise ValueError("m exceeds table total under subsampling")
    rng = seed.generator()
    return _hypergeometric_draw(table, m, rng)


def _hypergeometric_draw(table, m, rng) -> ContingencyTable:
    draw = rng.multivariate_hypergeometric(table.counts.ravel(), m)
    return ContingencyTable(counts=draw.reshape(table.shape))


def estimate_power_categorical(
    table: ContingencyTable,
    m: int,
    alpha: float,
    replicates: int,
    seed: SeedSpec = SeedSpec(0),
    scheme: str = BOOTSTRAP,
    stream_offset: int = 0,
) -> PowerPoint:
    """Rejection rate of the size-alpha LRT over resampled tables of size m."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    df = independence_df(table.shape)
    crit = chisq_upper_point(df, alpha)
    rejections = 0
    for b in range(replicates):
        rng = seed.child(stream_offset + b).generator()
        if scheme == BOOTSTRAP:
            resampled = _multinomial_draw(table, m, rng)
        elif scheme == SUBSAMPLE:
            resampled = _hypergeometric_draw(table, m, rng)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        g2, _, _ = _independence_stats(resampled.counts)
        if g2 > crit:
            rejections += 1
    return PowerPoint(m=m, replicates=replicates, rejections=rejections)


def find_nstar_categorical(
    table: ContingencyTable,
    alpha: float = 0.05,
    scheme: str = BOOTSTRAP,
    seed: SeedSpec = SeedSpec(0),
    config: Optional[SearchConfig] = None,
    target_beta: float = 0.5,
) -> CredibilityEstimate:
    """Credibility index of the independence model for a table.

    Reuses the power-curve search with the LRT-on-multinomial-resamples
    kernel; the noncentral approximation supplies the starting size.
    """
    fit = fit_independence(table)
    config = config or SearchConfig()
    if not lrt_test(table, fit, alpha).reject:
        return CredibilityEstimate(
            n_star=math.inf, bracket=None, target_beta=target_beta, alpha=alpha,
            scheme=scheme, curve=PowerCurve(points=()), n=table.n,
        )
    if config.m_cap is not None:
        m_cap = config.m_cap
    else:
        m_cap = table.n if scheme == SUBSAMPLE else 4 * table.n
    hint_source = nstar_asy2(table, fit, alpha)
    start_hint = int(round(hint_source)) if math.isfinite(hint_source) else None

    def evaluate(m: int, replicates: int, offset: int) -> PowerPoint:
        return estimate_power_categorical(
            table, m, alpha, replicates, seed, scheme, stream_offset=offset
        )

    n_star, bracket, curve = search_curve(
        evaluate, target_beta, m_cap, config, start_hint
    )
    return CredibilityEstimate(
        n_star=n_star, bracket=bracket, target_beta=target_beta, alpha=alpha,
        scheme=scheme, curve=curve, n=table.n,
    )


def bootstrap_ci_nstar_asy(
    table: ContingencyTable,
    alpha: float,
    B: int,
    level: float,
    seed: SeedSpec = SeedSpec(0),
) -> Tuple[float, float]:
    """Percentile bootstrap interval for the deviance-based approximation.

    Resamples of size n with a zero margin are redrawn within the replicate's
    own stream (counted; more than 1% redraws fails the job).
    """
    if B < 200:
        raise ValueError("B must be >= 200")
    if not (0 <= level < 1):
        raise ValueError("level must lie in [0, 1)")
    n = table.n
    values = np.empty(B)
    redraws = 0
    for b in range(B):
        rng = seed.child(b).generator()
        while True:
            resampled = _multinomial_draw(table, n, rng)
            counts = resampled.counts
            if counts.sum(axis=1).all() and counts.sum(axis=0).all():
                break
            redraws += 1
            if redraws > 0.01 * B:
                raise RuntimeError("too many zero-margin resamples")
        fit = fit_independence(resampled)
        values[b] = nstar_asy(resampled, fit, alpha)
    lo_q = (1.0 - level) / 2.0
    return (
        float(np.quantile(values, lo_q)),
        float(np.quantile(values, 1.0 - lo_q)),
    )
