"""Experiment harness: parameter sweeps, CSV emission, comparison reports.

The four presets mirror the standard evaluation grid: throughput versus
cluster size (fig2), degrees of freedom versus cluster size (fig3),
throughput versus the interference factor (fig4), and throughput versus the
per-cell user count with antennas scaling jointly (fig5). Rows are emitted in
a deterministic order and all randomness is derived from the run seed, so a
repeated run reproduces its CSV byte for byte.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .analytic import Route, SchemeKind, capacity, degrees_of_freedom
from .montecarlo import MonteCarloConfig, simulate
from .params import DEFAULTS, SystemParams

LN2 = math.log(2.0)

#: Relative-error gates for the analytic-vs-Monte-Carlo comparison. The
#: alignment scheme gets extra slack for its Gaussian edge-column
#: approximation.
TOLERANCES = {
    SchemeKind.GLOBAL_MJD: 0.03,
    SchemeKind.IA: 0.04,
    SchemeKind.RDMA: 0.03,
    SchemeKind.CI: 0.03,
}

SCHEME_ORDER = (SchemeKind.GLOBAL_MJD, SchemeKind.IA, SchemeKind.RDMA, SchemeKind.CI)

DEFAULT_ITERATIONS = 1000
DEFAULT_SEED = 42


class UnmatchedPair(ValueError):
    """A comparison key is missing one of the two routes."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: which variable, which values, which schemes and routes."""

    sweep_variable: str                 # "M" | "alpha" | "K"
    sweep_values: tuple
    schemes: tuple[SchemeKind, ...] = SCHEME_ORDER
    routes: tuple[Route, ...] = (Route.ANALYTIC, Route.MONTE_CARLO)
    iterations: int = DEFAULT_ITERATIONS
    seed: int = DEFAULT_SEED
    fixed: dict = field(default_factory=lambda: dict(DEFAULTS))
    collect_timings: bool = False

    def __post_init__(self) -> None:
        if self.sweep_variable not in ("M", "alpha", "K"):
            raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")

    def params_at(self, value) -> SystemParams:
        fixed = dict(self.fixed)
        fixed[self.sweep_variable] = value
        return SystemParams.make(M=int(fixed["M"]), K=int(fixed["K"]),
                                 alpha=float(fixed["alpha"]),
                                 gamma=float(fixed["gamma"]))


@dataclass
class ResultRow:
    """One evaluated (scheme, route, sweep point)."""

    scheme: str
    route: str
    M: int
    K: int
    n: int
    alpha: float
    gamma_db: float
    value_bits: float | None
    value_nats: float | None
    stderr: float | None      # Monte Carlo only, else empty
    iterations: int | None    # Monte Carlo only, else empty
    seed: int | None          # Monte Carlo only, else empty
    runtime_ms: int | None    # populated only when timings are requested
    error: str = ""


RESULT_FIELDS = [f.name for f in fields(ResultRow)]


def _point_seed(seed: int, scheme_index: int, point_index: int) -> int:
    """Per-point master seed, decorrelated across sweep points and schemes."""
    return int(np.random.SeedSequence((seed, scheme_index, point_index))
               .generate_state(1)[0])


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Evaluate every (sweep point, scheme, route) in deterministic order.

    Per-point failures are recorded as error rows and the run continues.
    """
    rows: list[ResultRow] = []
    for pi, value in enumerate(spec.sweep_values):
        params = spec.params_at(value)
        for si, scheme in enumerate(spec.schemes):
            for route in spec.routes:
                start = time.perf_counter()
                base = dict(scheme=scheme.value, route=route.value,
                            M=params.M, K=params.K, n=params.n,
                            alpha=params.alpha, gamma_db=params.gamma_db,
                            stderr=None, iterations=None, seed=None,
                            runtime_ms=None)
                try:
                    if route is Route.ANALYTIC:
                        res = capacity(scheme, params)
                    else:
                        cfg = MonteCarloConfig(
                            iterations=spec.iterations,
                            master_seed=_point_seed(spec.seed, si, pi),
                            scheme=scheme, params=params)
                        res = simulate(cfg)
                        base.update(stderr=res.meta["stderr_nats"],
                                    iterations=spec.iterations,
                                    seed=cfg.master_seed)
                    base.update(value_bits=res.value_bits,
                                value_nats=res.value_nats)
                except Exception as exc:  # record and continue
                    base.update(value_bits=None, value_nats=None)
                    rows.append(ResultRow(**base, error=f"{type(exc).__name__}: {exc}"))
                    continue
                if spec.collect_timings:
                    base["runtime_ms"] = int(round(1000 * (time.perf_counter() - start)))
                rows.append(ResultRow(**base))
    return rows


# ---------------------------------------------------------------------------
# CSV emission / parsing
# ---------------------------------------------------------------------------

def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: list[ResultRow], path) -> None:
    """UTF-8 CSV with the ResultRow fields as header, '.' decimals and
    deterministic row order (the order of `rows`)."""
    if not rows:
        raise ValueError(f"refusing to write empty result set to {path}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(RESULT_FIELDS)
            for row in rows:
                writer.writerow([_format(getattr(row, name)) for name in RESULT_FIELDS])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_csv(path) -> list[ResultRow]:
    """Inverse of emit_csv."""
    def conv(text: str, kind):
        return None if text == "" else kind(text)

    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != RESULT_FIELDS:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            for rec in reader:
                rows.append(ResultRow(
                    scheme=rec["scheme"], route=rec["route"],
                    M=int(rec["M"]), K=int(rec["K"]), n=int(rec["n"]),
                    alpha=float(rec["alpha"]), gamma_db=float(rec["gamma_db"]),
                    value_bits=conv(rec["value_bits"], float),
                    value_nats=conv(rec["value_nats"], float),
                    stderr=conv(rec["stderr"], float),
                    iterations=conv(rec["iterations"], int),
                    seed=conv(rec["seed"], int),
                    runtime_ms=conv(rec["runtime_ms"], int),
                    error=rec["error"]))
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    return rows


# ---------------------------------------------------------------------------
# Degrees-of-freedom table
# ---------------------------------------------------------------------------

@dataclass
class DofRow:
    scheme: str
    M: int
    K: int
    n: int
    dof: float
    dof_exact: str


DOF_FIELDS = [f.name for f in fields(DofRow)]


def emit_dof_table(m_values, K: int = DEFAULTS["K"]) -> list[DofRow]:
    """Tabulate the per-antenna degrees of freedom over a cluster-size sweep."""
    rows = []
    for m in m_values:
        params = SystemParams.make(M=int(m), K=K, alpha=DEFAULTS["alpha"],
                                   gamma=DEFAULTS["gamma"])
        for scheme in SCHEME_ORDER:
            d = degrees_of_freedom(scheme, params)
            rows.append(DofRow(scheme=scheme.value, M=params.M, K=params.K,
                               n=params.n, dof=float(d), dof_exact=str(d)))
    return rows


def emit_dof_csv(rows: list[DofRow], path) -> None:
    if not rows:
        raise ValueError(f"refusing to write empty dof table to {path}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DOF_FIELDS)
        for row in rows:
            writer.writerow([_format(getattr(row, name)) for name in DOF_FIELDS])


# ---------------------------------------------------------------------------
# Comparison report
# ---------------------------------------------------------------------------

@dataclass
class PairComparison:
    key: tuple
    scheme: str
    analytic_nats: float
    mc_nats: float
    rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance


@dataclass
class ComparisonReport:
    pairs: list[PairComparison]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.pairs)

    def render(self) -> str:
        lines = []
        for p in self.pairs:
            scheme, M, K, n, alpha, gdb = p.key
            status = "PASS" if p.passed else "FAIL"
            lines.append(
                f"{scheme:5s} M={M} K={K} n={n} alpha={alpha:g} gamma_db={gdb:g}: "
                f"analytic={p.analytic_nats:.4f} mc={p.mc_nats:.4f} nats  "
                f"rel_err={100 * p.rel_error:.2f}% tol={100 * p.tolerance:.0f}% {status}")
        n_pass = sum(p.passed for p in self.pairs)
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} "
                     f"({n_pass}/{len(self.pairs)} pairs within tolerance)")
        return "\n".join(lines)


def compare_report(rows: list[ResultRow]) -> ComparisonReport:
    """Pair analytic and Monte Carlo rows per sweep point and grade the
    relative error against the per-scheme tolerances.

    Raises UnmatchedPair when a point carries only one of the two routes.
    """
    buckets: dict[tuple, dict] = {}
    for row in rows:
        if row.error or row.value_nats is None:
            continue
        key = (row.scheme, row.M, row.K, row.n, row.alpha, row.gamma_db)
        buckets.setdefault(key, {})[row.route] = row.value_nats
    pairs = []
    for key in sorted(buckets, key=lambda k: (str(k[0]),) + tuple(map(float, k[1:]))):
        values = buckets[key]
        if set(values) != {Route.ANALYTIC.value, Route.MONTE_CARLO.value}:
            raise UnmatchedPair(f"point {key} has routes {sorted(values)}")
        a = values[Route.ANALYTIC.value]
        m = values[Route.MONTE_CARLO.value]
        rel = abs(a - m) / abs(m)
        scheme = SchemeKind(key[0])
        pairs.append(PairComparison(key=key, scheme=key[0], analytic_nats=a,
                                    mc_nats=m, rel_error=rel,
                                    tolerance=TOLERANCES[scheme]))
    return ComparisonReport(pairs=pairs)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def preset_spec(name: str, iterations: int = DEFAULT_ITERATIONS,
                seed: int = DEFAULT_SEED, collect_timings: bool = False) -> ExperimentSpec:
    """Named sweeps: fig2 (cluster size), fig4 (interference factor),
    fig5 (users per cell). fig3 is the dof table and has no spec."""
    if name == "fig2":
        return ExperimentSpec("M", tuple(range(3, 11)), iterations=iterations,
                              seed=seed, collect_timings=collect_timings)
    if name == "fig4":
        return ExperimentSpec("alpha", tuple(i / 10 for i in range(1, 11)),
                              iterations=iterations, seed=seed,
                              collect_timings=collect_timings)
    if name == "fig5":
        return ExperimentSpec("K", tuple(range(2, 11)), iterations=iterations,
                              seed=seed, collect_timings=collect_timings)
    raise ValueError(f"unknown preset {name!r} (expected fig2, fig3, fig4 or fig5)")


PRESET_NAMES = ("fig2", "fig3", "fig4", "fig5")


def emit_gnuplot(csv_path, gp_path, sweep_variable: str) -> None:
    """Write a minimal gnuplot script plotting value_bits against the sweep
    variable, lines for the analytic route and points for Monte Carlo."""
    col = {"M": 3, "alpha": 6, "K": 4}[sweep_variable]
    clauses = []
    for scheme in SCHEME_ORDER:
        for route in (Route.ANALYTIC, Route.MONTE_CARLO):
            style = "lines" if route is Route.ANALYTIC else "points"
            cond = (f'(strcol(1) eq "{scheme.value}" && '
                    f'strcol(2) eq "{route.value}" ? $8 : 1/0)')
            clauses.append(f"'{csv_path}' using {col}:{cond} with {style} "
                           f"title '{scheme.value} {route.value}'")
    lines = [
        'set datafile separator ","',
        f'set xlabel "{sweep_variable}"',
        'set ylabel "per-cell throughput [bits]"',
        'set key outside',
        "plot " + ", \\\n     ".join(clauses),
    ]
    with open(gp_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
