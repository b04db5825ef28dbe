"""Search of the power curve for the model credibility index.

The index is the resample size at which the chosen goodness-of-fit test first
attains a target rejection probability (0.5 by default).  The search brackets
the target by geometric doubling, then interpolates on the logit of the
estimated power linearly in sqrt(m) -- power curves are close to linear on
that scale under local alternatives -- and refines with more replicates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .distributions import SeedSpec
from .goftests import PEARSON_CHISQ_NORMAL, TestSpec, default_cells
from .resampling import (
    BOOTSTRAP,
    STREAM_BLOCK,
    SUBSAMPLE,
    PowerCurve,
    PowerPoint,
    estimate_power,
)

__all__ = [
    "SearchConfig",
    "CredibilityEstimate",
    "SearchBudgetError",
    "find_nstar",
    "nstar_beta",
    "reliability",
    "search_curve",
]

#: evaluator signature: (m, replicates, stream_offset) -> PowerPoint
Evaluator = Callable[[int, int, int], PowerPoint]


class SearchBudgetError(RuntimeError):
    """Bracketing failed within the evaluation budget."""

    def __init__(self, message: str, curve: PowerCurve):
        super().__init__(message)
        self.curve = curve


@dataclass(frozen=True)
class SearchConfig:
    replicates_coarse: int = 400
    replicates_fine: int = 1000
    m_cap: Optional[int] = None
    m_min: int = 16
    coarse_steps: int = 3
    fine_steps: int = 8
    max_evaluations: int = 60

    def __post_init__(self):
        if self.replicates_fine < self.replicates_coarse:
            raise ValueError("replicates_fine must be >= replicates_coarse")


@dataclass(frozen=True)
class CredibilityEstimate:
    """Estimated credibility index with its search trace and diagnostics."""

    n_star: float  # positive integer, or math.inf when the cap was reached
    bracket: Optional[Tuple[int, int]]
    target_beta: float
    alpha: float
    scheme: str
    curve: PowerCurve
    n: int  # size of the data the index was estimated from

    @property
    def finite(self) -> bool:
        return math.isfinite(self.n_star)

    @property
    def sqrt_n_star(self) -> float:
        return math.sqrt(self.n_star)

    @property
    def phi_inv(self) -> Optional[float]:
        if not self.finite:
            return None
        return self.n / self.n_star

    @property
    def eiss_lower_bound(self) -> Optional[float]:
        return self.phi_inv


def reliability(n: int, estimate: CredibilityEstimate) -> dict:
    """Inverse sampling-fraction diagnostic for an index estimate.

    Flags low reliability when n / n_star is 10 or less, where the power
    estimator behind the index carries considerable uncertainty.
    """
    if not estimate.finite:
        raise ValueError("reliability is undefined for an infinite index")
    phi_inv = n / estimate.n_star
    return {
        "phi_inv": phi_inv,
        "eiss_lower_bound": phi_inv,
        "low_reliability": phi_inv <= 10,
    }


def _logit(p: float, replicates: int) -> float:
    eps = 0.5 / max(replicates, 2)
    p = min(max(p, eps), 1.0 - eps)
    return math.log(p / (1.0 - p))


def _interpolate(lo: PowerPoint, hi: PowerPoint, target: float) -> int:
    """Solve logit(beta) linear in sqrt(m) for the target power."""
    s_lo, s_hi = math.sqrt(lo.m), math.sqrt(hi.m)
    y_lo = _logit(lo.beta_hat, lo.replicates)
    y_hi = _logit(hi.beta_hat, hi.replicates)
    y_t = math.log(target / (1.0 - target))
    if y_hi <= y_lo:  # noise produced a flat/inverted segment; bisect
        s = 0.5 * (s_lo + s_hi)
    else:
        s = s_lo + (s_hi - s_lo) * (y_t - y_lo) / (y_hi - y_lo)
        s = min(max(s, s_lo), s_hi)
    return int(round(s * s))


def _ci_contains(point: PowerPoint, target: float) -> bool:
    half = 1.96 * point.std_error
    return point.beta_hat - half <= target <= point.beta_hat + half


def search_curve(
    evaluate: Evaluator,
    target_beta: float,
    m_cap: int,
    config: SearchConfig = SearchConfig(),
    start_hint: Optional[int] = None,
) -> Tuple[float, Optional[Tuple[int, int]], PowerCurve]:
    """Generic index search over an arbitrary power evaluator.

    Returns (n_star, bracket, curve-of-evaluations).  ``n_star`` is math.inf
    when the power at ``m_cap`` stays below the target.
    """
    if not (0 < target_beta < 1):
        raise ValueError("target_beta must lie in (0, 1)")
    evals: Dict[int, PowerPoint] = {}
    count = 0

    def curve() -> PowerCurve:
        return PowerCurve(points=tuple(evals[m] for m in sorted(evals)))

    def ev(m: int, replicates: int) -> PowerPoint:
        nonlocal count
        cached = evals.get(m)
        if cached is not None and cached.replicates >= replicates:
            return cached
        if count >= config.max_evaluations:
            raise SearchBudgetError("evaluation budget exhausted", curve())
        point = evaluate(m, replicates, count * STREAM_BLOCK)
        count += 1
        evals[m] = point
        return point

    m_min = min(config.m_min, m_cap)
    reps_c = config.replicates_coarse

    # phase 1: bracket the target
    m = min(max(start_hint or m_min, m_min), m_cap)
    point = ev(m, reps_c)
    lo: Optional[PowerPoint] = None
    hi: Optional[PowerPoint] = None
    if point.beta_hat >= target_beta:
        hi = point
        while m > m_min:
            m = max(m_min, m // 2)
            point = ev(m, reps_c)
            if point.beta_hat < target_beta:
                lo = point
                break
            hi = point
        if lo is None:
            # target already met at the smallest admissible size
            return hi.m, (hi.m, hi.m), curve()
    else:
        lo = point
        while m < m_cap:
            m = min(m_cap, m * 2)
            point = ev(m, reps_c)
            if point.beta_hat >= target_beta:
                hi = point
                break
            lo = point
        if hi is None:
            # confirm the cap verdict at fine replicates before declaring
            point = ev(m_cap, config.replicates_fine)
            if point.beta_hat >= target_beta:
                hi = point
            else:
                return math.inf, None, curve()

    # phase 2: coarse interior points
    for _ in range(config.coarse_steps):
        if hi.m - lo.m <= 2:
            break
        cand = _interpolate(lo, hi, target_beta)
        cand = min(max(cand, lo.m + 1), hi.m - 1)
        point = ev(cand, reps_c)
        if point.beta_hat >= target_beta:
            hi = point
        else:
            lo = point

    # phase 3: refine at fine replicates
    candidate = hi
    for _ in range(config.fine_steps):
        cand = _interpolate(lo, hi, target_beta)
        cand = min(max(cand, lo.m), hi.m)
        point = ev(cand, config.replicates_fine)
        candidate = point
        if point.beta_hat >= target_beta:
            hi = point
        else:
            lo = point
        width_ok = (hi.m - lo.m) <= max(2, 0.05 * cand)
        if width_ok and _ci_contains(point, target_beta):
            break
        if hi.m - lo.m <= 1:
            break

    n_star = candidate.m if candidate.beta_hat >= target_beta else hi.m
    n_star = min(max(n_star, lo.m), hi.m)
    return n_star, (lo.m, hi.m), curve()


def _min_feasible_m(spec: TestSpec, floor: int) -> int:
    if spec.test == PEARSON_CHISQ_NORMAL:
        cells = spec.cells
        m = max(floor, 20)
        while m < 10_000:
            c = cells if cells is not None else default_cells(m)
            if m >= 5 * c:
                return m
            m += 1
        raise ValueError("no feasible Pearson sample size")
    return max(floor, 4)


def nstar_beta(
    data,
    spec: TestSpec,
    scheme: str = SUBSAMPLE,
    seed: SeedSpec = SeedSpec(0),
    config: Optional[SearchConfig] = None,
    target_beta: float = 0.5,
    start_hint: Optional[int] = None,
    jobs: int = 1,
) -> CredibilityEstimate:
    """Resample size at which the test attains power ``target_beta``."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("data must be nonempty")
    config = config or SearchConfig()
    if config.m_cap is not None:
        m_cap = config.m_cap
    else:
        m_cap = data.size if scheme == SUBSAMPLE else 4 * data.size
    if scheme == SUBSAMPLE and m_cap > data.size:
        raise ValueError("m_cap exceeds data size under subsampling")
    config = replace(config, m_min=_min_feasible_m(spec, config.m_min))

    def evaluate(m: int, replicates: int, offset: int) -> PowerPoint:
        return estimate_power(
            data, spec, m, replicates, scheme, seed, jobs=jobs, stream_offset=offset
        )

    n_star, bracket, curve = search_curve(
        evaluate, target_beta, m_cap, config, start_hint
    )
    return CredibilityEstimate(
        n_star=n_star,
        bracket=bracket,
        target_beta=target_beta,
        alpha=spec.alpha,
        scheme=scheme,
        curve=curve,
        n=int(data.size),
    )


def find_nstar(
    data,
    spec: TestSpec,
    scheme: str = SUBSAMPLE,
    seed: SeedSpec = SeedSpec(0),
    config: Optional[SearchConfig] = None,
    start_hint: Optional[int] = None,
    jobs: int = 1,
) -> CredibilityEstimate:
    """The model credibility index: the size giving the test power 0.5."""
    return nstar_beta(
        data, spec, scheme, seed, config,
        target_beta=0.5, start_hint=start_hint, jobs=jobs,
    )
