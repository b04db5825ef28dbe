"""Command-line surface: data ingestion, job configuration, reports.

Reports are machine readable: JSON (validated by the shipped schema) or CSV
power-curve columns for external plotting.  Exit codes: 0 success, 1 input
error, 2 search or budget error, 3 internal numeric error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import List, Optional

import numpy as np

from .categorical import (
    ContingencyTable,
    bootstrap_ci_nstar_asy,
    find_nstar_categorical,
    fit_independence,
    nstar_asy,
    nstar_asy2,
)
from .distributions import (
    DistributionFamily,
    Logistic,
    Normal,
    SeedSpec,
    sample,
)
from .goftests import (
    ESTIMATED_NORMAL,
    KS_ONE_SAMPLE,
    KS_TWO_SAMPLE,
    PEARSON_CHISQ_NORMAL,
    SHAPIRO_WILK,
    SampleError,
    TestSpec,
)
from .resampling import (
    BOOTSTRAP,
    SUBSAMPLE,
    PowerCurve,
    PowerEstimationError,
    PowerPoint,
    power_curve,
)
from .search import CredibilityEstimate, SearchBudgetError, SearchConfig, nstar_beta
from .ustat import eiss_local, simulate_estimator_distribution

__all__ = ["main", "ingest_sample", "ingest_table", "run"]

EXIT_INPUT = 1
EXIT_SEARCH = 2
EXIT_NUMERIC = 3

#: the moment-matched normal for the logistic(0,1) comparison studies
MATCHED_NORMAL = Normal(0.0, math.pi / math.sqrt(3.0))

_POPULATION_N = 1_000_000


class InputError(ValueError):
    pass


def ingest_sample(path: str) -> np.ndarray:
    """Read a one-column numeric CSV; header row auto-detected."""
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    values: List[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                if lineno == 1 and not values:
                    continue  # header
                raise InputError(f"{path}:{lineno}: non-numeric value {text!r}")
            if not math.isfinite(v):
                raise InputError(f"{path}:{lineno}: non-finite value")
            values.append(v)
    if not values:
        raise InputError(f"{path}: no numeric data")
    return np.asarray(values)


def ingest_table(path: str) -> ContingencyTable:
    """Read a rectangular CSV grid of nonnegative integer counts."""
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    rows: List[List[int]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            parsed = []
            for col, cell in enumerate(cells, start=1):
                try:
                    v = int(cell)
                except ValueError:
                    raise InputError(
                        f"{path}:{lineno}:col{col}: non-integer count {cell!r}"
                    )
                if v < 0:
                    raise InputError(f"{path}:{lineno}:col{col}: negative count")
                parsed.append(v)
            if rows and len(parsed) != len(rows[0]):
                raise InputError(f"{path}:{lineno}: ragged row")
            rows.append(parsed)
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 rows")
    try:
        table = ContingencyTable(np.asarray(rows, dtype=np.int64))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}")
    if np.any(table.counts.sum(axis=1) == 0) or np.any(table.counts.sum(axis=0) == 0):
        raise InputError(f"{path}: zero row or column margin")
    return table


def _parse_null(text: Optional[str]):
    if text is None or text == ESTIMATED_NORMAL:
        return ESTIMATED_NORMAL
    kind, _, params = text.partition(":")
    loc, scale = 0.0, 1.0
    if params:
        parts = params.split(",")
        try:
            loc = float(parts[0])
            scale = float(parts[1]) if len(parts) > 1 else 1.0
        except (ValueError, IndexError):
            raise InputError(f"bad null parameters {params!r}")
    if kind == "normal":
        return Normal(loc, scale)
    if kind == "logistic":
        return Logistic(loc, scale)
    if kind == "matched-normal":
        return MATCHED_NORMAL
    raise InputError(f"unknown null {text!r}")


def _curve_record(curve: PowerCurve) -> list:
    return [
        {
            "m": p.m,
            "replicates": p.replicates,
            "rejections": p.rejections,
            "beta_hat": p.beta_hat,
            "std_error": p.std_error,
        }
        for p in curve
    ]


def _estimate_record(est: CredibilityEstimate) -> dict:
    return {
        "n_star": est.n_star if est.finite else "infinite",
        "sqrt_n_star": est.sqrt_n_star if est.finite else None,
        "bracket": list(est.bracket) if est.bracket else None,
        "target_beta": est.target_beta,
        "alpha": est.alpha,
        "scheme": est.scheme,
        "n": est.n,
        "phi_inv": est.phi_inv,
        "eiss_lower_bound": est.eiss_lower_bound,
        "low_reliability": (est.phi_inv <= 10) if est.finite else None,
    }


def curve_to_csv(curve: PowerCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "beta_hat", "std_error", "replicates", "rejections"])
    for p in curve:
        writer.writerow([p.m, p.beta_hat, p.std_error, p.replicates, p.rejections])
    return buf.getvalue()


def csv_to_curve(text: str) -> PowerCurve:
    """Re-ingest a CSV power curve; exact round trip of the PowerPoints."""
    reader = csv.DictReader(io.StringIO(text))
    points = tuple(
        PowerPoint(
            m=int(row["m"]),
            replicates=int(row["replicates"]),
            rejections=int(row["rejections"]),
        )
        for row in reader
    )
    return PowerCurve(points=points)


def _spec_from_args(args) -> TestSpec:
    return TestSpec(
        test=args.test,
        alpha=args.alpha,
        null=_parse_null(getattr(args, "null", None)),
        cells=getattr(args, "cells", None),
    )


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        replicates_coarse=args.replicates_coarse,
        replicates_fine=args.replicates_fine,
        m_cap=args.m_cap,
    )


def _report(command: str, config: dict, results: dict, t0: float) -> dict:
    return {
        "report_version": 1,
        "command": command,
        "config": config,
        "results": results,
        "elapsed_seconds": round(time.time() - t0, 3),
    }


def _cmd_power(args, t0: float) -> dict:
    data = ingest_sample(args.input)
    spec = _spec_from_args(args)
    m_grid = [int(v) for v in args.m_grid.split(",")]
    curve = power_curve(
        data, spec, m_grid, args.replicates, args.scheme,
        SeedSpec(args.seed), jobs=args.jobs,
    )
    config = {
        "input": args.input, "test": args.test, "alpha": args.alpha,
        "null": getattr(args, "null", None) or ESTIMATED_NORMAL,
        "scheme": args.scheme, "replicates": args.replicates,
        "m_grid": m_grid, "seed": args.seed, "jobs": args.jobs,
    }
    return _report(
        "power", config,
        {"n": int(data.size), "curve": _curve_record(curve)}, t0,
    )


def _cmd_nstar(args, t0: float) -> dict:
    data = ingest_sample(args.input)
    spec = _spec_from_args(args)
    est = nstar_beta(
        data, spec, scheme=args.scheme, seed=SeedSpec(args.seed),
        config=_search_config(args), target_beta=args.target_beta,
        start_hint=args.start_hint, jobs=args.jobs,
    )
    config = {
        "input": args.input, "test": args.test, "alpha": args.alpha,
        "null": getattr(args, "null", None) or ESTIMATED_NORMAL,
        "scheme": args.scheme, "target_beta": args.target_beta,
        "seed": args.seed, "jobs": args.jobs,
        "replicates_coarse": args.replicates_coarse,
        "replicates_fine": args.replicates_fine, "m_cap": args.m_cap,
    }
    return _report(
        "nstar", config,
        {
            "estimate": _estimate_record(est),
            "curve": _curve_record(est.curve),
        }, t0,
    )


def _cmd_table(args, t0: float) -> dict:
    table = ingest_table(args.input)
    fit = fit_independence(table)
    est = find_nstar_categorical(
        table, alpha=args.alpha, scheme=args.scheme,
        seed=SeedSpec(args.seed), config=_search_config(args),
    )
    results = {
        "n": table.n,
        "shape": list(table.shape),
        "g2": fit.g2,
        "x2": fit.x2,
        "df": fit.df,
        "kl_rate": fit.kl_rate,
        "nstar_asy": nstar_asy(table, fit, args.alpha),
        "nstar_asy2": nstar_asy2(table, fit, args.alpha),
        "estimate": _estimate_record(est),
        "curve": _curve_record(est.curve),
    }
    if args.ci_level is not None:
        lo, hi = bootstrap_ci_nstar_asy(
            table, args.alpha, args.ci_replicates, args.ci_level,
            SeedSpec(args.seed).child(1 << 40),
        )
        results["nstar_asy_ci"] = {
            "level": args.ci_level, "replicates": args.ci_replicates,
            "low": lo, "high": hi,
        }
    config = {
        "input": args.input, "alpha": args.alpha, "scheme": args.scheme,
        "seed": args.seed, "ci_level": args.ci_level,
        "replicates_coarse": args.replicates_coarse,
        "replicates_fine": args.replicates_fine, "m_cap": args.m_cap,
    }
    return _report("table", config, results, t0)


def _cmd_eiss(args, t0: float) -> dict:
    entries = []
    for phi_inv in (float(v) for v in args.phi_inv.split(",")):
        if phi_inv <= 1:
            raise InputError("phi-inv values must exceed 1")
        try:
            rep = eiss_local(
                1.0 / phi_inv, args.d, args.alpha, args.delta,
                draws=args.draws, seed=SeedSpec(args.seed),
            )
            entries.append({
                "phi_inv": phi_inv,
                "variance": rep.variance,
                "eiss": rep.eiss,
                "bound_phi_inv": rep.bound_phi_inv,
                "mc_std_error": rep.mc_std_error,
            })
        except RuntimeError as exc:
            entries.append({"phi_inv": phi_inv, "error": str(exc)})
    config = {
        "d": args.d, "alpha": args.alpha, "delta": args.delta,
        "draws": args.draws, "seed": args.seed,
    }
    return _report("eiss", config, {"entries": entries}, t0)


def _cmd_simulate(args, t0: float) -> dict:
    seed = SeedSpec(args.seed)
    config = {"preset": args.preset, "seed": args.seed, "jobs": args.jobs}
    if args.preset == "normal-vs-logistic-2s":
        data = sample(Logistic(0.0, 1.0), args.n, seed.child(1))
        spec = TestSpec(test=KS_TWO_SAMPLE, alpha=args.alpha, null=MATCHED_NORMAL)
        est = nstar_beta(
            data, spec, scheme=SUBSAMPLE, seed=seed.child(2),
            config=SearchConfig(m_cap=args.m_cap), jobs=args.jobs,
        )
        config.update({"n": args.n, "alpha": args.alpha})
        results = {
            "estimate": _estimate_record(est),
            "curve": _curve_record(est.curve),
        }
    elif args.preset == "normal-vs-logistic-1s":
        data = sample(Logistic(0.0, 1.0), args.n, seed.child(1))
        spec = TestSpec(test=KS_ONE_SAMPLE, alpha=args.alpha, null=ESTIMATED_NORMAL)
        est = nstar_beta(
            data, spec, scheme=SUBSAMPLE, seed=seed.child(2),
            config=SearchConfig(m_cap=args.m_cap), jobs=args.jobs,
        )
        config.update({"n": args.n, "alpha": args.alpha})
        results = {
            "estimate": _estimate_record(est),
            "curve": _curve_record(est.curve),
        }
    elif args.preset == "table4":
        spec = TestSpec(test=KS_ONE_SAMPLE, alpha=args.alpha, null=ESTIMATED_NORMAL)
        out = {}
        for scheme in (SUBSAMPLE, BOOTSTRAP):
            dist = simulate_estimator_distribution(
                Logistic(0.0, 1.0), args.n, args.m, args.datasets,
                args.replicates, scheme, spec,
                seed.child(0 if scheme == SUBSAMPLE else 1 << 50),
                jobs=args.jobs,
            )
            out[scheme] = {
                "mean": dist.mean, "sd": dist.sd,
                "eiss_empirical": dist.eiss_empirical,
            }
        config.update({
            "n": args.n, "m": args.m, "datasets": args.datasets,
            "replicates": args.replicates, "alpha": args.alpha,
        })
        results = {"phi_inv": args.n / args.m, "schemes": out}
    elif args.preset == "table5":
        config.update({
            "d": args.d, "alpha": args.alpha, "delta": args.delta,
            "draws": args.draws, "phi_inv": args.phi_inv,
        })
        eiss_args = argparse.Namespace(
            phi_inv=args.phi_inv, d=args.d, alpha=args.alpha,
            delta=args.delta, draws=args.draws, seed=args.seed,
        )
        return _report(
            "simulate", config, _cmd_eiss(eiss_args, t0)["results"], t0
        )
    else:
        raise InputError(f"unknown preset {args.preset!r}")
    return _report("simulate", config, results, t0)


def run(args) -> dict:
    """Execute a parsed job and return the report document."""
    t0 = time.time()
    handlers = {
        "power": _cmd_power,
        "nstar": _cmd_nstar,
        "table": _cmd_table,
        "eiss": _cmd_eiss,
        "simulate": _cmd_simulate,
    }
    return handlers[args.command](args, t0)


def _add_common(p, data: bool = True):
    p.add_argument("--seed", type=int, default=int(os.environ.get("MODELCRED_SEED", "0")))
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    if data:
        p.add_argument("--input", required=True)


def _add_test_flags(p):
    p.add_argument(
        "--test",
        choices=[KS_ONE_SAMPLE, KS_TWO_SAMPLE, SHAPIRO_WILK, PEARSON_CHISQ_NORMAL],
        default=KS_ONE_SAMPLE,
    )
    p.add_argument("--null", default=None,
                   help="estimated-normal | normal:loc,scale | logistic:loc,scale | matched-normal")
    p.add_argument("--cells", type=int, default=None)
    p.add_argument("--scheme", choices=[SUBSAMPLE, BOOTSTRAP], default=SUBSAMPLE)


def _add_search_flags(p):
    p.add_argument("--replicates-coarse", type=int, default=400)
    p.add_argument("--replicates-fine", type=int, default=1000)
    p.add_argument("--m-cap", type=int, default=None)
    p.add_argument("--start-hint", type=int, default=None)
    p.add_argument("--target-beta", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelcred",
        description="Model credibility index estimation via resampling power curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="power curve over a grid of resample sizes")
    _add_common(p)
    _add_test_flags(p)
    p.add_argument("--m-grid", required=True, help="comma-separated sizes")
    p.add_argument("--replicates", type=int, default=1000)

    p = sub.add_parser("nstar", help="search for the credibility index")
    _add_common(p)
    _add_test_flags(p)
    _add_search_flags(p)

    p = sub.add_parser("table", help="independence-model index for a count table")
    _add_common(p)
    p.add_argument("--scheme", choices=[SUBSAMPLE, BOOTSTRAP], default=BOOTSTRAP)
    p.add_argument("--replicates-coarse", type=int, default=400)
    p.add_argument("--replicates-fine", type=int, default=1000)
    p.add_argument("--m-cap", type=int, default=None)
    p.add_argument("--ci-level", type=float, default=None)
    p.add_argument("--ci-replicates", type=int, default=1000)

    p = sub.add_parser("eiss", help="local-alternative EISS at given overlaps")
    _add_common(p, data=False)
    p.add_argument("--phi-inv", default="2,10,100", help="comma-separated values")
    p.add_argument("--d", type=int, default=25)
    p.add_argument("--delta", type=float, default=3.67)
    p.add_argument("--draws", type=int, default=200_000)

    p = sub.add_parser("simulate", help="named pure-simulation studies")
    _add_common(p, data=False)
    p.add_argument("--preset", required=True, choices=[
        "normal-vs-logistic-1s", "normal-vs-logistic-2s", "table4", "table5",
    ])
    p.add_argument("--n", type=int, default=_POPULATION_N)
    p.add_argument("--m", type=int, default=485)
    p.add_argument("--m-cap", type=int, default=None)
    p.add_argument("--datasets", type=int, default=200)
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--d", type=int, default=25)
    p.add_argument("--delta", type=float, default=3.67)
    p.add_argument("--draws", type=int, default=200_000)
    p.add_argument("--phi-inv", default="2,10,100")
    return parser


def _emit(report: dict, args) -> None:
    if args.format == "csv":
        curve = report["results"].get("curve")
        if curve is None:
            raise InputError("csv format requires a command producing a power curve")
        points = PowerCurve(points=tuple(
            PowerPoint(m=c["m"], replicates=c["replicates"], rejections=c["rejections"])
            for c in curve
        ))
        text = curve_to_csv(points)
    else:
        text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = run(args)
        _emit(report, args)
    except (InputError, SampleError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SearchBudgetError, PowerEstimationError) as exc:
        print(f"search error: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (RuntimeError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
