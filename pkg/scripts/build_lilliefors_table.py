"""Regenerate the estimated-parameter KS critical-value table.

Simulates the null distribution of the KS statistic when the normal mean and
standard deviation are estimated from the sample (100,000 replicates per grid
size), and stores upper-tail quantiles scaled by sqrt(n) - 0.01 + 0.85/sqrt(n)
so they interpolate smoothly in n.  Output is committed to
src/modelcred/data/lilliefors_critical.json; rerunning this script reproduces
it bit-for-bit.
"""
import json
import pathlib

import numpy as np
from scipy import special

N_GRID = [
    4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20, 25, 30, 35, 40, 50, 60, 80,
    100, 150, 200, 300, 400, 500, 700, 1000, 1500, 2000,
]
ALPHAS = [0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.49]
REPLICATES = 100_000
MASTER_SEED = 20240521


def null_ks_stats(n: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(replicates)
    chunk = max(1, min(replicates, 20_000_000 // n))
    done = 0
    i = np.arange(1, n + 1)
    while done < replicates:
        b = min(chunk, replicates - done)
        x = rng.standard_normal((b, n))
        x.sort(axis=1)
        z = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, ddof=1, keepdims=True)
        f = special.ndtr(z)
        d_plus = (i / n - f).max(axis=1)
        d_minus = (f - (i - 1) / n).max(axis=1)
        out[done : done + b] = np.maximum(d_plus, d_minus)
        done += b
    return out


def main() -> None:
    scaled = []
    for n in N_GRID:
        rng = np.random.default_rng(np.random.SeedSequence([MASTER_SEED, n]))
        d = null_ks_stats(n, REPLICATES, rng)
        crit = np.quantile(d, 1.0 - np.asarray(ALPHAS))
        factor = np.sqrt(n) - 0.01 + 0.85 / np.sqrt(n)
        scaled.append((crit * factor).tolist())
        print(f"n={n:5d} crit(0.05)={crit[ALPHAS.index(0.05)]:.5f}")
    out = {
        "replicates": REPLICATES,
        "master_seed": MASTER_SEED,
        "n_grid": N_GRID,
        "alphas": ALPHAS,
        "scaled": scaled,
    }
    path = (
        pathlib.Path(__file__).resolve().parents[1]
        / "src" / "modelcred" / "data" / "lilliefors_critical.json"
    )
    path.write_text(json.dumps(out, indent=1))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
