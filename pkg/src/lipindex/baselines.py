"""Comparison methods: penalty + Pijavskii (PEN) and a fixed-constant index method.

The fixed-constant method reuses the ALT search loop with every ``eta_i``
replaced by an a priori constant for the level of point ``i``. It stands in
for IBBA, whose branch-and-bound bookkeeping is not reproduced.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence, Union

import numpy as np

from .alt import (
    BUDGET_EXHAUSTED,
    CONVERGED,
    AltParams,
    SearchState,
    SolveReport,
    index_search,
    select_interval,
)
from .expr import Expr, eval_array, eval_expr
from .index import EvalCounters, TrialRecord
from .problems import ConstrainedProblem

__all__ = [
    "FixedConstants",
    "penalize",
    "penalize_array",
    "pijavskii_run",
    "pen_run",
    "ibba_variant_run",
    "estimate_lipschitz",
    "lipschitz_constants",
    "SAFETY_FACTOR",
]

SAFETY_FACTOR = 1.1


class FixedConstants(tuple):
    """Positive per-level constants ``K_1..K_{m+1}``."""

    def __new__(cls, values: Sequence[float]):
        values = tuple(float(v) for v in values)
        if not values or any(not v > 0 for v in values):
            raise ValueError("fixed Lipschitz constants must all be positive")
        return super().__new__(cls, values)


def penalize(p: ConstrainedProblem, P_star: float) -> Callable[[float], float]:
    """``f(x) + P* max(0, g_1(x), ..., g_m(x))``; needs every function total on [a, b]."""

    def h(x: float) -> float:
        worst = 0.0
        for g in p.constraints:
            worst = max(worst, eval_expr(g, x))
        return eval_expr(p.objective, x) + P_star * worst

    return h


def penalize_array(p: ConstrainedProblem, P_star: float) -> Callable[[np.ndarray], np.ndarray]:
    def h(xs: np.ndarray) -> np.ndarray:
        worst = np.zeros_like(xs, dtype=np.float64)
        for g in p.constraints:
            worst = np.maximum(worst, eval_array(g, xs))
        return eval_array(p.objective, xs) + P_star * worst

    return h


def pijavskii_run(
    h: Callable[[float], float],
    L: float,
    interval: tuple[float, float],
    epsilon: float,
    max_trials: int = 1_000_000,
    evals_per_trial: int = 1,
    method: str = "pen",
    name: str = "",
) -> SolveReport:
    """Pijavskii's saw-tooth method with a known Lipschitz constant ``L``.

    Each trial is booked as reaching the top level of a problem with
    ``evals_per_trial - 1`` constraints, so ``evals == evals_per_trial * trials``.
    """
    if not L > 0:
        raise ValueError(f"Lipschitz constant must be positive, got {L}")
    a, b = interval
    tol = epsilon * (b - a)
    counters = EvalCounters(evals_per_trial - 1)
    xs = np.empty(0)
    zs = np.empty(0)
    trace: list[TrialRecord] = []

    def trial(x: float) -> None:
        nonlocal xs, zs
        v = h(x)
        counters.record(evals_per_trial)
        trace.append(TrialRecord(x=x, nu=evals_per_trial, values=(v,), k=len(trace)))
        pos = int(np.searchsorted(xs, x))
        xs = np.insert(xs, pos, x)
        zs = np.insert(zs, pos, v)

    trial(a)
    trial(b)
    status = BUDGET_EXHAUSTED
    while True:
        R = 0.5 * (zs[:-1] + zs[1:]) - 0.5 * L * (xs[1:] - xs[:-1])
        t = select_interval(R)
        if xs[t] - xs[t - 1] <= tol:
            status = CONVERGED
            break
        if len(trace) >= max_trials:
            break
        x_new = float(0.5 * (xs[t - 1] + xs[t]) - (zs[t] - zs[t - 1]) / (2 * L))
        if not xs[t - 1] < x_new < xs[t]:
            # the minorant bottoms out on a trial point: the lower bound meets the record
            record = float(zs.min())
            if R[t - 1] >= record - 1e-12 * (1.0 + abs(record)):
                status = CONVERGED
            break
        trial(x_new)

    i_best = int(np.argmin(zs))
    return SolveReport(
        method=method,
        status=status,
        x_best=float(xs[i_best]),
        f_best=float(zs[i_best]),
        nu_best=evals_per_trial,
        counters=counters,
        trace=trace,
        problem=name,
        epsilon=epsilon,
    )


def pen_run(
    p: ConstrainedProblem,
    epsilon: float,
    P_star: Optional[float] = None,
    L: Optional[float] = None,
    max_trials: int = 1_000_000,
    grid: int = 10**6,
) -> SolveReport:
    """Penalty reduction of ``p`` solved by :func:`pijavskii_run`.

    ``P_star`` defaults to the problem's penalty coefficient and ``L`` to a
    grid estimate of the penalized function.
    """
    if P_star is None:
        P_star = p.penalty_coefficient
    if P_star is None:
        raise ValueError(f"problem {p.name!r} has no penalty coefficient; pass P_star")
    if L is None:
        L = estimate_lipschitz(penalize_array(p, P_star), p.domain, grid)
    return pijavskii_run(
        penalize(p, P_star), L, p.domain, epsilon, max_trials,
        evals_per_trial=p.m + 1, method="pen", name=p.name,
    )


def ibba_variant_run(
    p: ConstrainedProblem,
    K: Sequence[float],
    params: AltParams = AltParams(),
    diagnostics: bool = False,
    check: bool = False,
) -> SolveReport:
    """Index search with ``eta_i = K[nu_i - 1]`` held fixed."""
    K = FixedConstants(K)
    if len(K) != p.m + 1:
        raise ValueError(f"need {p.m + 1} constants, got {len(K)}")

    def fixed(state: SearchState, params: AltParams) -> list[float]:
        return [K[nu - 1] for nu in state.nus]

    return index_search(p, params, fixed, "ibba", diagnostics=diagnostics, check=check)


def estimate_lipschitz(
    e: Union[Expr, Callable[[np.ndarray], np.ndarray]],
    interval: tuple[float, float],
    n: int = 10**6,
    safety: float = SAFETY_FACTOR,
) -> float:
    """Largest adjacent-point slope on a uniform ``n``-grid, times ``safety``.

    ``e`` is an expression or a vectorized callable. A constant function
    gives 0; callers floor the result themselves.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    xs = np.linspace(interval[0], interval[1], n)
    ys = e(xs) if callable(e) else eval_array(e, xs)
    slopes = np.abs(np.diff(ys)) / np.diff(xs)
    return float(slopes.max()) * safety


def lipschitz_constants(
    p: ConstrainedProblem, n: int = 10**6, floor: float = 1e-6
) -> tuple[float, ...]:
    """Per-level constants ``K_1..K_{m+1}``: the problem's own, or grid estimates.

    Estimates scan the whole domain, so every function must be total there.
    """
    if p.lipschitz is not None:
        return tuple(p.lipschitz)
    return tuple(max(estimate_lipschitz(g, p.domain, n), floor) for g in p.functions)
