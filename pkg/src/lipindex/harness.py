"""Benchmark harness: method x problem x epsilon grids, tables, traces, oracle."""

from __future__ import annotations

import csv
import functools
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import alt
from .alt import AltParams, SolveReport
from .baselines import ibba_variant_run, lipschitz_constants, pen_run
from .expr import eval_array
from .problems import ConstrainedProblem, get_problem

__all__ = [
    "METHODS",
    "RunSpec",
    "SummaryRow",
    "OracleResult",
    "grid_oracle",
    "solve",
    "run_experiment",
    "bench_suite",
    "ratio_table",
    "write_summary",
    "write_ratios",
    "write_trace",
    "SUMMARY_COLUMNS",
]

log = logging.getLogger(__name__)

METHODS = ("alt", "ibba", "pen")

SUMMARY_COLUMNS = [
    "problem", "method", "epsilon", "N_g1", "N_g2", "N_g3", "N_f",
    "trials", "evals", "x_best", "f_best", "status",
]


@dataclass(frozen=True)
class RunSpec:
    problem: str
    method: str
    epsilon: float
    r: float = 1.3
    xi: float = 1e-6
    P_star: Optional[float] = None
    K: Optional[tuple[float, ...]] = None
    max_trials: int = 1_000_000
    trace: Optional[str] = None
    summary: Optional[str] = None
    diagnostics: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")


@dataclass
class SummaryRow:
    problem: str
    method: str
    epsilon: float
    per_level: list[int]
    trials: int
    evals: int
    x_best: Optional[float]
    f_best: Optional[float]
    status: str
    report: Optional[SolveReport] = field(default=None, repr=False, compare=False)

    @property
    def key(self):
        return (self.problem, self.method, self.epsilon)

    def as_csv_row(self) -> list[str]:
        *constraints, n_f = self.per_level
        n_g = [str(n) for n in constraints] + ["-"] * (3 - len(constraints))
        return [
            self.problem, self.method, _fmt(self.epsilon), *n_g[:3], str(n_f),
            str(self.trials), str(self.evals),
            _fmt(self.x_best), _fmt(self.f_best), self.status,
        ]


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    x_ref: Optional[float] = None
    f_ref: Optional[float] = None


def grid_oracle(p: ConstrainedProblem, n: int = 10**7, chunk: int = 10**6) -> OracleResult:
    """Exhaustive scan of the constraint chain on a uniform ``n``-point grid.

    Each function is evaluated only at grid points where every earlier
    constraint holds. Ties go to the leftmost grid point.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    grid = np.linspace(p.a, p.b, n)
    best_x, best_f = None, None
    for start in range(0, n, chunk):
        xs = grid[start:start + chunk]
        for g in p.constraints:
            xs = xs[eval_array(g, xs) <= 0]
            if xs.size == 0:
                break
        if xs.size == 0:
            continue
        fs = eval_array(p.objective, xs)
        i = int(np.argmin(fs))
        if best_f is None or fs[i] < best_f:
            best_x, best_f = float(xs[i]), float(fs[i])
    if best_x is None:
        return OracleResult(feasible=False)
    return OracleResult(feasible=True, x_ref=best_x, f_ref=best_f)


@functools.lru_cache(maxsize=None)
def _constants(p: ConstrainedProblem) -> tuple[float, ...]:
    return lipschitz_constants(p)


def solve(spec: RunSpec, problem: Optional[ConstrainedProblem] = None) -> SolveReport:
    p = problem if problem is not None else get_problem(spec.problem)
    params = AltParams(r=spec.r, xi=spec.xi, epsilon=spec.epsilon, max_trials=spec.max_trials)
    if spec.method == "alt":
        return alt.run(p, params, diagnostics=spec.diagnostics)
    if spec.method == "ibba":
        K = spec.K if spec.K is not None else _constants(p)
        return ibba_variant_run(p, K, params, diagnostics=spec.diagnostics)
    return pen_run(p, spec.epsilon, P_star=spec.P_star, max_trials=spec.max_trials)


def _row(report: SolveReport, problem: str) -> SummaryRow:
    return SummaryRow(
        problem=problem,
        method=report.method,
        epsilon=report.epsilon,
        per_level=list(report.counters.per_level),
        trials=report.trials,
        evals=report.evals,
        x_best=report.x_best,
        f_best=report.f_best,
        status=report.status,
        report=report,
    )


def run_experiment(spec: RunSpec, problem: Optional[ConstrainedProblem] = None) -> SummaryRow:
    """Run one spec; write its trace/summary files when paths are given."""
    p = problem if problem is not None else get_problem(spec.problem)
    report = solve(spec, p)
    row = _row(report, p.name)
    if spec.trace:
        write_trace(report, spec.trace)
    if spec.summary:
        write_summary([row], spec.summary)
    return row


def write_trace(report: SolveReport, path: str | Path) -> None:
    """One JSON line per trial in execution order; diagnostics go to ``<path>.diag``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in report.trace:
            fh.write(json.dumps({"method": report.method, **rec.to_json()}) + "\n")
    if report.diagnostics:
        with open(f"{path}.diag", "w", encoding="utf-8", newline="\n") as fh:
            for d in report.diagnostics:
                fh.write(json.dumps(d) + "\n")


def _sorted(rows: Iterable[SummaryRow]) -> list[SummaryRow]:
    order = {m: i for i, m in enumerate(METHODS)}
    return sorted(rows, key=lambda r: (r.problem, order.get(r.method, 99), r.epsilon))


def summary_csv(rows: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in _sorted(rows):
        w.writerow(row.as_csv_row())
    return buf.getvalue()


def write_summary(rows: Iterable[SummaryRow], path: str | Path) -> None:
    Path(path).write_text(summary_csv(rows), encoding="utf-8")


def ratio_table(rows: Sequence[SummaryRow]) -> tuple[list[str], list[list[str]]]:
    """PEN/ALT and IBBA/ALT ratios of trials and evals, one row per problem.

    Columns exist only for baselines that were run alongside ALT. The last
    row holds column averages.
    """
    by_key = {r.key: r for r in rows}
    problems = sorted({r.problem for r in rows})
    epsilons = sorted({r.epsilon for r in rows}, reverse=True)
    others = [m for m in ("pen", "ibba") if any(r.method == m for r in rows)]
    if not any(r.method == "alt" for r in rows):
        others = []

    columns = []
    for eps in epsilons:
        for metric in ("trials", "evals"):
            for other in others:
                columns.append((eps, metric, other))
    header = ["problem"] + [f"{metric}_{other}/alt@{eps:g}" for eps, metric, other in columns]
    if not columns:
        return header, []

    table: list[list[str]] = []
    sums = [0.0] * len(columns)
    counts = [0] * len(columns)
    for prob in problems:
        line = [prob]
        for c, (eps, metric, other) in enumerate(columns):
            base = by_key.get((prob, "alt", eps))
            cmp_ = by_key.get((prob, other, eps))
            if base is None or cmp_ is None:
                line.append("")
                continue
            ratio = getattr(cmp_, metric) / getattr(base, metric)
            sums[c] += ratio
            counts[c] += 1
            line.append(f"{ratio:.2f}")
        table.append(line)
    table.append(["Av."] + [f"{s / n:.2f}" if n else "" for s, n in zip(sums, counts)])
    return header, table


def write_ratios(rows: Sequence[SummaryRow], path: str | Path) -> None:
    header, table = ratio_table(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(table)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _run_spec(spec: RunSpec) -> SummaryRow:
    row = run_experiment(spec)
    row.report = None  # keep process-pool payloads small
    return row


def bench_suite(
    specs: Sequence[RunSpec], out_dir: Optional[str | Path] = None, jobs: int = 1
) -> list[SummaryRow]:
    """Run every spec and, with ``out_dir``, write summary.csv, ratios.csv and traces/."""
    if not specs:
        raise ValueError("bench needs at least one run spec")
    if out_dir is not None:
        out = Path(out_dir)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        specs = [
            _with_trace(s, out / "traces" / f"{Path(s.problem).stem}_{s.method}_{s.epsilon:g}.jsonl")
            for s in specs
        ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_spec, specs))
    else:
        rows = [run_experiment(s) for s in specs]
    rows = _sorted(rows)
    if out_dir is not None:
        write_summary(rows, Path(out_dir) / "summary.csv")
        write_ratios(rows, Path(out_dir) / "ratios.csv")
    return rows


def _with_trace(spec: RunSpec, path: Path) -> RunSpec:
    fields = {**spec.__dict__, "trace": str(path)}
    return RunSpec(**fields)
