"""Command-line harness.

    clustermjd run --preset fig2 --out fig2.csv [--iters N] [--seed S]
    clustermjd run --scheme ia --M 4 --K 5 --alpha 0.5 --gamma-db 20 --route both
    clustermjd compare --in fig2.csv

Relative output paths resolve against $CLUSTERMJD_OUTDIR when it is set.
A flat key=value config file can preset any flag (flags win):

    iters = 500
    seed = 7
    gamma_db = 20
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analytic import Route, SchemeKind, capacity
from .bench import (DEFAULT_ITERATIONS, DEFAULT_SEED, PRESET_NAMES,
                    ExperimentSpec, ResultRow, compare_report, emit_csv,
                    emit_dof_csv, emit_dof_table, emit_gnuplot, parse_csv,
                    preset_spec, run_experiment)
from .montecarlo import MonteCarloConfig, simulate
from .params import DEFAULTS, SystemParams

OUTDIR_ENV = "CLUSTERMJD_OUTDIR"

_SCHEME_ALIASES = {"mjd": SchemeKind.GLOBAL_MJD, "ia": SchemeKind.IA,
                   "rdma": SchemeKind.RDMA, "ci": SchemeKind.CI}


def _load_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment, blank lines ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _resolve_out(out: str | None, default_name: str) -> Path:
    base = Path(os.environ.get(OUTDIR_ENV, "."))
    path = Path(out) if out else Path(default_name)
    return path if path.is_absolute() else base / path


def _build_parser() -> tuple[argparse.ArgumentParser, argparse.ArgumentParser]:
    parser = argparse.ArgumentParser(prog="clustermjd",
                                     description="clustered joint-decoding throughput benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a preset sweep or a single point")
    run.add_argument("--config", help="flat key=value defaults file")
    run.add_argument("--preset", choices=PRESET_NAMES)
    run.add_argument("--scheme", default="all",
                     help="mjd|ia|rdma|ci|all (single-point runs)")
    run.add_argument("--M", type=int, default=DEFAULTS["M"])
    run.add_argument("--K", type=int, default=DEFAULTS["K"])
    run.add_argument("--alpha", type=float, default=DEFAULTS["alpha"])
    run.add_argument("--gamma-db", type=float, default=20.0)
    run.add_argument("--route", choices=["analytic", "mc", "both"], default="both")
    run.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--out", help="output CSV path")
    run.add_argument("--timings", action="store_true",
                     help="fill runtime_ms (breaks byte-reproducibility)")
    run.add_argument("--gnuplot", action="store_true",
                     help="also emit a gnuplot script next to the CSV")

    cmp_ = sub.add_parser("compare", help="grade analytic vs Monte Carlo pairs")
    cmp_.add_argument("--in", dest="infile", required=True)
    return parser, run


def _routes(route: str) -> tuple[Route, ...]:
    if route == "both":
        return (Route.ANALYTIC, Route.MONTE_CARLO)
    return (Route.ANALYTIC,) if route == "analytic" else (Route.MONTE_CARLO,)


def _run_single_point(args) -> list[ResultRow]:
    schemes = (tuple(_SCHEME_ALIASES.values()) if args.scheme == "all"
               else (_SCHEME_ALIASES[args.scheme],))
    gamma = 10.0 ** (args.gamma_db / 10.0)
    spec = ExperimentSpec(
        sweep_variable="M", sweep_values=(args.M,), schemes=schemes,
        routes=_routes(args.route), iterations=args.iters, seed=args.seed,
        fixed={"M": args.M, "K": args.K, "alpha": args.alpha, "gamma": gamma},
        collect_timings=args.timings)
    return run_experiment(spec)


def _cmd_run(args) -> int:
    if args.preset == "fig3":
        rows = emit_dof_table(range(3, 11))
        out = _resolve_out(args.out, "fig3_dof.csv")
        out.parent.mkdir(parents=True, exist_ok=True)
        emit_dof_csv(rows, out)
        print(f"wrote {len(rows)} dof rows to {out}")
        return 0

    if args.preset:
        spec = preset_spec(args.preset, iterations=args.iters, seed=args.seed,
                           collect_timings=args.timings)
        rows = run_experiment(spec)
        default_name = f"{args.preset}.csv"
        sweep_variable = spec.sweep_variable
    else:
        if args.scheme not in _SCHEME_ALIASES and args.scheme != "all":
            print(f"unknown scheme {args.scheme!r}", file=sys.stderr)
            return 2
        rows = _run_single_point(args)
        default_name = "run.csv"
        sweep_variable = "M"

    out = _resolve_out(args.out, default_name)
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_csv(rows, out)
    failures = [r for r in rows if r.error]
    print(f"wrote {len(rows)} rows to {out}" +
          (f" ({len(failures)} error rows)" if failures else ""))
    if args.gnuplot:
        gp = out.with_suffix(".gp")
        emit_gnuplot(out, gp, sweep_variable)
        print(f"wrote gnuplot script to {gp}")
    if args.route == "both" and not args.preset:
        report = compare_report([r for r in rows if not r.error])
        print(report.render())
        if not report.passed:
            return 1
    return 2 if failures else 0


def _cmd_compare(args) -> int:
    rows = parse_csv(args.infile)
    report = compare_report(rows)
    print(report.render())
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser, run_parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    # pre-parse --config so file values become defaults that flags override
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        config = _load_config(known.config)
        defaults = {}
        for action in run_parser._actions:
            if action.dest not in config:
                continue
            raw = config[action.dest]
            if isinstance(action.default, bool):
                defaults[action.dest] = raw.lower() in ("1", "true", "yes")
            elif action.type is not None:
                defaults[action.dest] = action.type(raw)
            else:
                defaults[action.dest] = raw
        run_parser.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_compare(args)


if __name__ == "__main__":
    sys.exit(main())
