"""Command-line front end.

Exit codes: 0 success, 1 computational failure (a failed point or validation),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analytic, montecarlo
from .config import PER_KM2, ConfigError, RunConfig, load_document, parse_config
from .special import DomainError
from .sweep import (
    CriticalRecord,
    SweepRecord,
    VALIDATION_DELTA_H,
    VALIDATION_LAMBDA_KM2,
    default_validation_models,
    model_id,
    records_to_csv,
    records_to_json,
    run_critical,
    run_sweep,
    run_validate,
)

log = logging.getLogger("ahdcov")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", type=Path, help="YAML/JSON config with dotted keys")
    p.add_argument("--alphas", type=_floats, help="pathloss exponents, e.g. '1.5,4'")
    p.add_argument("--breakpoints", type=_floats, help="breakpoints in metres, e.g. '10'")
    p.add_argument("--tau-db", type=float, help="SIR decoding threshold in dB")
    p.add_argument("--delta-h", type=float, help="antenna height difference in metres")
    p.add_argument("--lambda", dest="lam", type=float, help="BS density in BS/km^2")
    p.add_argument("--p-dbm", type=float, help="transmit power in dBm (no effect on SIR)")
    p.add_argument("--fading", choices=("rayleigh", "rice"))
    p.add_argument("--nu-nc", type=float, help="Rice noncentrality")
    p.add_argument("--nu-dof", type=float, help="Rice degrees of freedom")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes for grid points")
    p.add_argument("-o", "--output", type=Path, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahdcov",
        description="Coverage probability and spatial throughput of downlink cellular networks "
        "with multi-slope pathloss and antenna height difference.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="analytic CP/ST at one operating point")
    _add_common(p)
    p = sub.add_parser("simulate", help="Monte Carlo CP/ST at one operating point")
    _add_common(p)

    p = sub.add_parser("sweep", help="CP/ST over a density or ahd grid")
    _add_common(p)
    p.add_argument("--variable", choices=("lambda", "ahd"))
    p.add_argument("--grid", type=_floats, help="explicit grid values")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--outputs", help="comma list of analytic,mc,bounds")

    p = sub.add_parser("critical", help="critical densities under a CP requirement")
    _add_common(p)
    p.add_argument("--epsilon", type=float, help="CP requirement in (0, 1)")
    p.add_argument("--delta-h-grid", type=_floats, help="evaluate over these ahd values (m)")

    p = sub.add_parser("validate", help="analytic vs Monte Carlo agreement report (JSON)")
    _add_common(p)
    p.add_argument("--delta-h-grid", type=_floats, default=list(VALIDATION_DELTA_H))
    p.add_argument("--lambda-grid", type=_floats, default=list(VALIDATION_LAMBDA_KM2))
    p.add_argument(
        "--truncation-trials",
        type=int,
        default=0,
        help="per-point subsample rerun with a doubled window to report truncation bias",
    )
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "model.alphas": getattr(args, "alphas", None),
        "model.breakpoints_m": getattr(args, "breakpoints", None),
        "net.tau_db": getattr(args, "tau_db", None),
        "net.delta_h_m": getattr(args, "delta_h", None),
        "net.lambda_per_km2": getattr(args, "lam", None),
        "net.p_dbm": getattr(args, "p_dbm", None),
        "fading.kind": getattr(args, "fading", None),
        "fading.nu_nc": getattr(args, "nu_nc", None),
        "fading.nu_dof": getattr(args, "nu_dof", None),
        "mc.trials": getattr(args, "trials", None),
        "mc.seed": getattr(args, "seed", None),
        "mc.workers": getattr(args, "workers", None),
        "sweep.variable": getattr(args, "variable", None),
        "sweep.grid": getattr(args, "grid", None),
        "sweep.lo": getattr(args, "lo", None),
        "sweep.hi": getattr(args, "hi", None),
        "sweep.points": getattr(args, "points", None),
        "sweep.scale": getattr(args, "scale", None),
        "sweep.outputs": getattr(args, "outputs", None),
        "qos.epsilon": getattr(args, "epsilon", None),
    }
    return {k: v for k, v in mapping.items() if v is not None}


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _cmd_eval(run: RunConfig, args) -> int:
    cfg = run.network()
    lam_km2 = cfg.lam / PER_KM2
    rec = SweepRecord(lam_km2, cfg.ahd, model_id(cfg.model))
    try:
        rec.cp_analytic = analytic.cp(cfg)
        rec.st_analytic = lam_km2 * rec.cp_analytic * math.log2(1.0 + cfg.tau)
        if cfg.model.n_slopes >= 3:
            bounds = analytic.cp_bounds_mspm(cfg)
            rec.cp_lower, rec.cp_upper = bounds.lower, bounds.upper
    except (ArithmeticError, ValueError) as exc:
        rec.error = str(exc)
    _write_records([rec], args)
    return EXIT_FAIL if rec.error else EXIT_OK


def _cmd_simulate(run: RunConfig, args) -> int:
    cfg = run.network()
    lam_km2 = cfg.lam / PER_KM2
    rec = SweepRecord(lam_km2, cfg.ahd, model_id(cfg.model))
    est = montecarlo.estimate_cp(cfg, run.trials, run.seed, run.workers)
    rec.cp_mc, rec.cp_mc_ci95 = est.mean, est.ci95_halfwidth
    rec.st_mc = lam_km2 * est.mean * math.log2(1.0 + cfg.tau)
    _write_records([rec], args)
    return EXIT_OK


def _write_records(records, args, record_type=SweepRecord) -> None:
    if args.format == "json":
        _emit(records_to_json(records), args.output)
    else:
        _emit(records_to_csv(records, record_type), args.output)


def _cmd_sweep(run: RunConfig, args) -> int:
    if run.sweep is None:
        raise ConfigError("sweep", "a sweep needs sweep.grid or sweep.lo/hi/points")
    records = run_sweep(run)
    _write_records(records, args)
    return EXIT_FAIL if any(r.error for r in records) else EXIT_OK


def _cmd_critical(run: RunConfig, args) -> int:
    records = run_critical(run, args.delta_h_grid)
    _write_records(records, args, CriticalRecord)
    return EXIT_FAIL if any(r.error for r in records) else EXIT_OK


def _cmd_validate(document: dict, overrides: dict, args) -> int:
    merged = {**document, **overrides}
    if "model.alphas" in merged:
        run = parse_config(document, overrides)
        models = [run.model]
    else:
        # the default three-model grid; the model keys are not required here
        run = parse_config(document, {**overrides, "model.alphas": [4.0]})
        models = default_validation_models()
    report = run_validate(
        models=models,
        delta_h=args.delta_h_grid,
        lambdas_km2=args.lambda_grid,
        tau=run.tau,
        trials=run.trials,
        seed=run.seed,
        fading=run.fading,
        workers=run.workers,
        truncation_trials=args.truncation_trials,
    )
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        document = load_document(args.config) if args.config else {}
        overrides = _overrides(args)
        if args.command == "validate":
            return _cmd_validate(document, overrides, args)
        run = parse_config(document, overrides)
        for note in run.notes:
            log.warning(note)
        handler = {"eval": _cmd_eval, "simulate": _cmd_simulate, "sweep": _cmd_sweep, "critical": _cmd_critical}
        return handler[args.command](run, args)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
