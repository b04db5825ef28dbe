"""Goodness-of-fit test battery.

Each test maps a sample (or two) to a statistic together with a size-alpha
reject/accept decision.  The decision contract is uniform: ``reject`` holds
exactly when ``statistic > critical_value``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

import numpy as np
from scipy import special, stats

from .distributions import DistributionFamily, Normal, cdf as family_cdf

__all__ = [
    "KS_ONE_SAMPLE",
    "KS_TWO_SAMPLE",
    "SHAPIRO_WILK",
    "PEARSON_CHISQ_NORMAL",
    "MULTINOMIAL_LRT",
    "ESTIMATED_NORMAL",
    "TestSpec",
    "TestResult",
    "ks_one_sample",
    "ks_two_sample",
    "shapiro_wilk",
    "pearson_chisq_normal",
    "run_test",
    "default_cells",
    "lilliefors_critical",
]

KS_ONE_SAMPLE = "ks-one-sample"
KS_TWO_SAMPLE = "ks-two-sample"
SHAPIRO_WILK = "shapiro-wilk"
PEARSON_CHISQ_NORMAL = "pearson-chisq-normal"
MULTINOMIAL_LRT = "multinomial-lrt"

#: sentinel null specification: fit a normal by sample mean/sd, use
#: estimated-parameter (Lilliefors-type) critical values.
ESTIMATED_NORMAL = "estimated-normal"

_TESTS = frozenset(
    {KS_ONE_SAMPLE, KS_TWO_SAMPLE, SHAPIRO_WILK, PEARSON_CHISQ_NORMAL, MULTINOMIAL_LRT}
)


@dataclass(frozen=True)
class TestSpec:
    """Identity and configuration of one goodness-of-fit test."""

    test: str
    alpha: float = 0.05
    null: Union[DistributionFamily, str, None] = None
    cells: Optional[int] = None

    def __post_init__(self):
        if self.test not in _TESTS:
            raise ValueError(f"unknown test {self.test!r}")
        if not (0 < self.alpha < 0.5):
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.cells is not None and self.cells < 4:
            raise ValueError("cells must be >= 4")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    critical_value: float
    reject: bool
    df: Optional[int] = None
    p_value: Optional[float] = None


class SampleError(ValueError):
    """Raised when a sample violates a test precondition."""


def _as_sample(x, min_n: int = 1) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < min_n:
        raise SampleError(f"sample size {arr.size} < required {min_n}")
    if not np.all(np.isfinite(arr)):
        raise SampleError("sample contains non-finite values")
    return arr


def _ks_statistic(sorted_sample: np.ndarray, null_cdf: np.ndarray) -> float:
    # exact sup over both sides of every ECDF jump
    n = sorted_sample.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - null_cdf), np.max(null_cdf - (i - 1) / n)))


def ks_asymptotic_critical(n: float, alpha: float) -> float:
    """One-sample KS critical value, Stephens small-sample correction."""
    return float(special.kolmogi(alpha)) / (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n))


def _load_lilliefors_table() -> dict:
    text = resources.files("modelcred.data").joinpath("lilliefors_critical.json").read_text()
    table = json.loads(text)
    table["n_grid"] = np.asarray(table["n_grid"], dtype=float)
    table["alphas"] = np.asarray(table["alphas"], dtype=float)
    table["scaled"] = np.asarray(table["scaled"], dtype=float)
    return table


_LILLIEFORS: Optional[dict] = None


def lilliefors_critical(n: int, alpha: float) -> float:
    """Critical value of the KS statistic with normal parameters estimated.

    Backed by a Monte Carlo table (100k null replicates per grid size, built
    once and shipped read-only); interpolated in 1/sqrt(n) and log(alpha).
    Beyond the table the scaled statistic is treated as constant in n.
    """
    global _LILLIEFORS
    if _LILLIEFORS is None:
        _LILLIEFORS = _load_lilliefors_table()
    t = _LILLIEFORS
    if not (t["alphas"][0] <= alpha <= t["alphas"][-1]):
        raise ValueError(
            f"alpha {alpha} outside tabulated range "
            f"[{t['alphas'][0]}, {t['alphas'][-1]}]"
        )
    # interpolate scaled critical values across alpha (log scale), then n
    la = math.log(alpha)
    log_alphas = np.log(t["alphas"])
    scaled_at_alpha = np.array(
        [np.interp(la, log_alphas, row) for row in t["scaled"]]
    )
    inv_sqrt = 1.0 / np.sqrt(t["n_grid"])
    x = 1.0 / math.sqrt(n)
    # n_grid ascending -> inv_sqrt descending; np.interp needs ascending xs
    s = float(np.interp(x, inv_sqrt[::-1], scaled_at_alpha[::-1]))
    return s / (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n))


def lilliefors_scale(n: float) -> float:
    """Denominator making the scaled Lilliefors statistic nearly n-free."""
    return math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n)


def ks_one_sample(sample, spec: TestSpec) -> TestResult:
    """One-sample Kolmogorov-Smirnov test.

    With a fully specified null the classical asymptotic critical value is
    used; with ``null=ESTIMATED_NORMAL`` the normal parameters come from the
    sample and the critical value from the estimated-parameter table.
    """
    if spec.test != KS_ONE_SAMPLE:
        raise ValueError("spec.test must be ks-one-sample")
    x = np.sort(_as_sample(sample, min_n=4))
    n = x.size
    if spec.null == ESTIMATED_NORMAL or spec.null is None:
        sd = x.std(ddof=1)
        if sd == 0:
            raise SampleError("zero sample variance under estimated-normal null")
        null_cdf = special.ndtr((x - x.mean()) / sd)
        crit = lilliefors_critical(n, spec.alpha)
    else:
        null_cdf = np.array([family_cdf(spec.null, v) for v in x])
        crit = ks_asymptotic_critical(n, spec.alpha)
    d = _ks_statistic(x, null_cdf)
    return TestResult(statistic=d, critical_value=crit, reject=d > crit)


def ks_two_sample(sample_a, sample_b, alpha: float) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test with asymptotic critical value."""
    a = np.sort(_as_sample(sample_a, min_n=4))
    b = np.sort(_as_sample(sample_b, min_n=4))
    grid = np.concatenate([a, b])
    ecdf_a = np.searchsorted(a, grid, side="right") / a.size
    ecdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(ecdf_a - ecdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    crit = math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n_eff)
    return TestResult(statistic=d, critical_value=crit, reject=d > crit)


def _sw_log1mw_params(n: int):
    """Mean/sd of the normalizing transformation of W (Royston 1992)."""
    if n < 4 or n > 5000:
        raise SampleError("Shapiro-Wilk supports 4 <= n <= 5000")
    if n >= 12:
        x = math.log(n)
        mu = -1.5861 - 0.31082 * x - 0.083751 * x**2 + 0.0038915 * x**3
        sigma = math.exp(-0.4803 - 0.082676 * x + 0.0030302 * x**2)
        return "log1mw", mu, sigma, None
    g = -2.273 + 0.459 * n
    mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
    sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
    return "small", mu, sigma, g


def _sw_pvalue(w: float, n: int) -> float:
    kind, mu, sigma, g = _sw_log1mw_params(n)
    if w >= 1.0:
        return 1.0
    if kind == "log1mw":
        z = (math.log(1.0 - w) - mu) / sigma
    else:
        arg = g - math.log(1.0 - w)
        if arg <= 0:
            return 0.0
        z = (-math.log(arg) - mu) / sigma
    return float(special.ndtr(-z))


def _sw_w_critical(n: int, alpha: float) -> float:
    """W below which the Royston-normalized p-value drops under alpha."""
    kind, mu, sigma, g = _sw_log1mw_params(n)
    z = float(special.ndtri(1.0 - alpha))
    if kind == "log1mw":
        return 1.0 - math.exp(mu + sigma * z)
    return 1.0 - math.exp(g - math.exp(-(mu + sigma * z)))


def shapiro_wilk(sample, alpha: float) -> TestResult:
    """Shapiro-Wilk normality test (normal-scores correlation form).

    The decision is surfaced through the uniform contract by mapping the
    statistic monotonically: statistic = 1 - W against 1 - W_critical.
    """
    x = _as_sample(sample, min_n=4)
    if x.size > 5000:
        raise SampleError("Shapiro-Wilk supports 4 <= n <= 5000")
    if np.all(x == x[0]):
        raise SampleError("all sample values identical")
    w = float(stats.shapiro(x).statistic)
    p = _sw_pvalue(w, x.size)
    w_crit = _sw_w_critical(x.size, alpha)
    return TestResult(
        statistic=1.0 - w,
        critical_value=1.0 - w_crit,
        reject=(1.0 - w) > (1.0 - w_crit),
        p_value=p,
    )


def default_cells(n: int) -> int:
    """Default Pearson cell count, ceil(2 n^{2/5})."""
    return max(4, math.ceil(2.0 * n ** 0.4))


def pearson_chisq_normal(sample, spec: TestSpec) -> TestResult:
    """Pearson chi-square test of normality on equiprobable fitted cells.

    Cell boundaries sit at quantiles of the fitted normal, so every expected
    count is n/cells; df = cells - 3 for the two estimated parameters.
    """
    if spec.test != PEARSON_CHISQ_NORMAL:
        raise ValueError("spec.test must be pearson-chisq-normal")
    x = _as_sample(sample, min_n=4)
    n = x.size
    cells = spec.cells if spec.cells is not None else default_cells(n)
    if cells < 4:
        raise ValueError("cells must be >= 4")
    if n < 5 * cells:
        raise SampleError(f"need n >= 5*cells, got n={n}, cells={cells}")
    sd = x.std(ddof=1)
    if sd == 0:
        raise SampleError("zero sample variance")
    expected = n / cells
    if expected < 1:
        raise SampleError("expected cell count below 1")
    probs = np.arange(1, cells) / cells
    boundaries = x.mean() + sd * special.ndtri(probs)
    observed = np.bincount(np.searchsorted(boundaries, x), minlength=cells)
    statistic = float(np.sum((observed - expected) ** 2) / expected)
    df = cells - 3
    crit = 2.0 * float(special.gammaincinv(df / 2.0, 1.0 - spec.alpha))
    return TestResult(
        statistic=statistic, critical_value=crit, reject=statistic > crit, df=df
    )


def run_test(sample, spec: TestSpec) -> TestResult:
    """Dispatch a one-sample test spec against a sample."""
    if spec.test == KS_ONE_SAMPLE:
        return ks_one_sample(sample, spec)
    if spec.test == SHAPIRO_WILK:
        return shapiro_wilk(sample, spec.alpha)
    if spec.test == PEARSON_CHISQ_NORMAL:
        return pearson_chisq_normal(sample, spec)
    raise ValueError(f"run_test does not handle {spec.test!r}")
