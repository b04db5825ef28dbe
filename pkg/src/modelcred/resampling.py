"""Power estimation by subsampling or bootstrap resampling.

The estimation contract is map-reduce over replicates: replicate ``b`` draws
all of its randomness from stream ``seed.child(offset + b)``, rejection counts
are summed, and the result is therefore identical for any worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .distributions import SeedSpec, sample_with
from .goftests import (
    KS_TWO_SAMPLE,
    SampleError,
    TestSpec,
    ks_two_sample,
    run_test,
)

__all__ = [
    "SUBSAMPLE",
    "BOOTSTRAP",
    "PowerPoint",
    "PowerCurve",
    "PowerEstimationError",
    "draw_subsample",
    "draw_bootstrap",
    "estimate_power",
    "power_curve",
]

SUBSAMPLE = "subsample"
BOOTSTRAP = "bootstrap"

#: stream-id stride separating independent evaluation blocks
STREAM_BLOCK = 1 << 20

# fraction of replicates allowed to error before the whole job fails
_ERROR_BUDGET = 0.01


class PowerEstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PowerPoint:
    """Estimated rejection probability at one resample size."""

    m: int
    replicates: int
    rejections: int
    errors: int = 0

    @property
    def beta_hat(self) -> float:
        return self.rejections / self.replicates

    @property
    def std_error(self) -> float:
        b = self.beta_hat
        return float(np.sqrt(b * (1.0 - b) / self.replicates))


@dataclass(frozen=True)
class PowerCurve:
    points: Tuple[PowerPoint, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def as_arrays(self):
        ms = np.array([p.m for p in self.points])
        betas = np.array([p.beta_hat for p in self.points])
        ses = np.array([p.std_error for p in self.points])
        return ms, betas, ses


def _subsample_indices(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m distinct positions chosen uniformly by partial Fisher-Yates."""
    idx = np.arange(n)
    j = np.arange(m)
    k = j + (rng.random(m) * (n - j)).astype(np.intp)
    for a, b in zip(j, k):
        idx[a], idx[b] = idx[b], idx[a]
    return idx[:m]


def draw_subsample(data, m: int, seed: SeedSpec) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if m > data.size:
        raise ValueError(f"subsample size {m} exceeds data size {data.size}")
    if m < 1:
        raise ValueError("m must be >= 1")
    return data[_subsample_indices(data.size, m, seed.generator())]


def draw_bootstrap(data, m: int, seed: SeedSpec) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.size < 1:
        raise ValueError("data must be nonempty")
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed.generator()
    return data[rng.integers(0, data.size, m)]


def _resample(data: np.ndarray, m: int, scheme: str, rng: np.random.Generator) -> np.ndarray:
    if scheme == SUBSAMPLE:
        return data[_subsample_indices(data.size, m, rng)]
    if scheme == BOOTSTRAP:
        return data[rng.integers(0, data.size, m)]
    raise ValueError(f"unknown scheme {scheme!r}")


def _replicate_reject(data: np.ndarray, spec: TestSpec, m: int, scheme: str,
                      rng: np.random.Generator) -> bool:
    resampled = _resample(data, m, scheme, rng)
    if spec.test == KS_TWO_SAMPLE:
        # compare the data resample against a fresh draw from the model
        model = sample_with(spec.null, m, rng)
        return ks_two_sample(resampled, model, spec.alpha).reject
    return run_test(resampled, spec).reject


def estimate_power(
    data,
    spec: TestSpec,
    m: int,
    replicates: int,
    scheme: str = SUBSAMPLE,
    seed: SeedSpec = SeedSpec(0),
    jobs: int = 1,
    stream_offset: int = 0,
) -> PowerPoint:
    """Estimate the rejection probability at resample size ``m``.

    Replicate ``b`` uses stream ``seed.child(stream_offset + b)``.  Replicates
    that raise :class:`SampleError` are counted as errors, never rejections;
    the job fails when more than 1% of replicates error.
    """
    data = np.asarray(data, dtype=float)
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if scheme == SUBSAMPLE and m > data.size:
        raise ValueError(f"subsample size {m} exceeds data size {data.size}")
    if m < 1:
        raise ValueError("m must be >= 1")

    def work(block: Sequence[int]):
        rej = err = 0
        first_error: Optional[Tuple[int, Exception]] = None
        for b in block:
            rng = seed.child(stream_offset + b).generator()
            try:
                if _replicate_reject(data, spec, m, scheme, rng):
                    rej += 1
            except SampleError as exc:
                err += 1
                if first_error is None:
                    first_error = (b, exc)
        return rej, err, first_error

    ids = range(replicates)
    if jobs <= 1:
        results = [work(ids)]
    else:
        blocks = [ids[i::jobs] for i in range(jobs)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, blocks))
    rejections = sum(r for r, _, _ in results)
    errors = sum(e for _, e, _ in results)
    if errors > _ERROR_BUDGET * replicates:
        idx, exc = next(fe for _, _, fe in results if fe is not None)
        raise PowerEstimationError(
            f"{errors}/{replicates} replicates errored "
            f"(first at replicate {idx}: {exc})"
        )
    return PowerPoint(m=m, replicates=replicates, rejections=rejections, errors=errors)


def power_curve(
    data,
    spec: TestSpec,
    m_grid: Sequence[int],
    replicates: int,
    scheme: str = SUBSAMPLE,
    seed: SeedSpec = SeedSpec(0),
    jobs: int = 1,
) -> PowerCurve:
    """One PowerPoint per grid value; grid points use disjoint stream blocks."""
    m_grid = list(m_grid)
    if not m_grid:
        raise ValueError("m_grid must be nonempty")
    if any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ValueError("m_grid must be strictly increasing")
    points = []
    for j, m in enumerate(m_grid):
        points.append(
            estimate_power(
                data, spec, m, replicates, scheme, seed,
                jobs=jobs, stream_offset=j * STREAM_BLOCK,
            )
        )
    return PowerCurve(points=tuple(points))
