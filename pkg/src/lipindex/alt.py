"""Geometric index algorithm with local tuning of Lipschitz estimates (ALT).

The search keeps trial points sorted on [a, b]. Every iteration it
recomputes the adjusted values ``z_i``, per-point Lipschitz estimates
``eta_i``, interval characteristics, and subdivides the interval with the
smallest characteristic. ``eta_i`` balances the local slope around ``x_i``
against a global per-level estimate scaled by the width of the adjacent
intervals.

The driver :func:`index_search` is shared with the fixed-constant
baseline, which only swaps the estimator.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .index import EvalCounters, TrialRecord, evaluate_indexed
from .problems import ConstrainedProblem

__all__ = [
    "AltParams",
    "SearchState",
    "LocalEstimates",
    "SolveReport",
    "InvariantError",
    "init",
    "recompute_z",
    "local_estimates",
    "lambda_values",
    "characteristics",
    "select_interval",
    "next_point",
    "step7_augment",
    "index_search",
    "run",
    "CONVERGED",
    "BUDGET_EXHAUSTED",
    "NO_FEASIBLE",
]

log = logging.getLogger(__name__)

CONVERGED = "converged"
BUDGET_EXHAUSTED = "trial_budget_exhausted"
NO_FEASIBLE = "no_feasible_point_found"

# relative width below which binary64 subdivision is meaningless
RESOLUTION = 1e-12


class InvariantError(AssertionError):
    """An internal search invariant was violated (only raised with ``check=True``)."""


@dataclass(frozen=True)
class AltParams:
    r: float = 1.3
    xi: float = 1e-6
    epsilon: float = 1e-4
    max_trials: int = 1_000_000

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError(f"reliability parameter r must exceed 1, got {self.r}")
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_trials < 2:
            raise ValueError("max_trials must allow the two initial trials")


@dataclass
class SearchState:
    problem: ConstrainedProblem
    trials: list[TrialRecord]  # sorted by x
    counters: EvalCounters
    Lambda: list[float]
    M: int = 1
    z_star: float = 0.0
    z: list[float] = field(default_factory=list)
    history: list[TrialRecord] = field(default_factory=list)  # execution order
    # views of ``trials`` kept in step by add_trial
    xs: list[float] = field(default_factory=list)
    nus: list[int] = field(default_factory=list)
    lasts: list[float] = field(default_factory=list)

    def add_trial(self, x: float) -> TrialRecord:
        pos = bisect.bisect_left(self.xs, x)
        if pos < len(self.xs) and self.xs[pos] == x:
            raise InvariantError(f"repeated trial at x={x!r}")
        rec = evaluate_indexed(self.problem, x, self.counters, k=len(self.history))
        self.trials.insert(pos, rec)
        self.xs.insert(pos, rec.x)
        self.nus.insert(pos, rec.nu)
        self.lasts.insert(pos, rec.last)
        self.history.append(rec)
        return rec


@dataclass
class LocalEstimates:
    lam: list[float]
    gamma: list[float]
    eta: list[float]
    x_max: dict[int, float]


@dataclass
class SolveReport:
    method: str
    status: str
    x_best: Optional[float]
    f_best: Optional[float]
    nu_best: int
    counters: EvalCounters
    trace: list[TrialRecord]
    diagnostics: list[dict] = field(default_factory=list)
    problem: str = ""
    epsilon: float = 0.0

    @property
    def trials(self) -> int:
        return self.counters.total_trials

    @property
    def evals(self) -> int:
        return self.counters.weighted_evals


def init(p: ConstrainedProblem, params: AltParams) -> SearchState:
    """Execute the two initial trials at ``a`` and ``b``."""
    state = SearchState(
        problem=p,
        trials=[],
        counters=EvalCounters(p.m),
        Lambda=[params.xi] * (p.m + 1),
    )
    state.add_trial(p.a)
    state.add_trial(p.b)
    recompute_z(state)
    return state


def recompute_z(state: SearchState) -> SearchState:
    """Refresh ``M``, the record value ``z_star`` and the adjusted values ``z``."""
    state.M, state.z_star, state.z = _z_values(state.nus, state.lasts)
    return state


def _z_values(nus: Sequence[int], lasts: Sequence[float]) -> tuple[int, float, list[float]]:
    nus = np.asarray(nus)
    lasts = np.asarray(lasts, dtype=np.float64)
    M = int(nus.max())
    top = nus == M
    z_star = float(lasts[top].min())
    z = np.where(top, lasts - z_star, lasts)
    return M, z_star, z.tolist()


def lambda_values(xs: Sequence[float], nus: Sequence[int], z: Sequence[float]) -> list[float]:
    """Local slope estimates keyed on the indexes of each point and its neighbours.

    At the ends of the sequence only the existing neighbour decides;
    combinations that need the missing neighbour give 0.
    """
    k = len(xs) - 1
    lam = []
    for i in range(k + 1):
        nu = nus[i]
        left = right = None  # -1, 0, +1: neighbour index below, equal, above
        if i > 0:
            dl = xs[i] - xs[i - 1]
            ls = abs(z[i] - z[i - 1]) / dl
            zl = z[i] / dl
            left = (nus[i - 1] > nu) - (nus[i - 1] < nu)
        if i < k:
            dr = xs[i + 1] - xs[i]
            rs = abs(z[i + 1] - z[i]) / dr
            zr = z[i] / dr
            right = (nus[i + 1] > nu) - (nus[i + 1] < nu)

        if left is None:
            value = {0: rs, 1: zr}.get(right, 0.0)
        elif right is None:
            value = {0: ls, 1: zl}.get(left, 0.0)
        elif left == 0 and right == 0:
            value = max(ls, rs)
        elif left == 0 and right == 1:
            value = max(ls, zr)
        elif left == 1 and right == 0:
            value = max(rs, zl)
        elif left == 1 and right == 1:
            value = max(zl, zr)
        elif left == 1 and right == -1:
            value = zl
        elif left == -1 and right == 1:
            value = zr
        elif left == 0 and right == -1:
            value = ls
        elif left == -1 and right == 0:
            value = rs
        else:
            value = 0.0
        lam.append(value)
    return lam


def local_estimates(state: SearchState, params: AltParams) -> LocalEstimates:
    """Compute ``lambda``, ``gamma`` and ``eta`` for every point.

    Updates ``state.Lambda`` (running maximum per level) before ``gamma``
    is formed.
    """
    xs, nus, z = state.xs, state.nus, state.z
    k = len(xs) - 1
    lam = lambda_values(xs, nus, z)

    for i in range(k + 1):
        level = nus[i] - 1
        if lam[i] > state.Lambda[level]:
            state.Lambda[level] = lam[i]

    x_max: dict[int, float] = {}
    for j in range(1, k + 1):
        width = xs[j] - xs[j - 1]
        for level in {nus[j], nus[j - 1]}:
            if width > x_max.get(level, 0.0):
                x_max[level] = width

    gamma, eta = [], []
    for i in range(k + 1):
        widest = max(
            xs[i] - xs[i - 1] if i > 0 else 0.0,
            xs[i + 1] - xs[i] if i < k else 0.0,
        )
        denom = x_max.get(nus[i], 0.0)
        g = state.Lambda[nus[i] - 1] * widest / denom if denom > 0 else 0.0
        gamma.append(g)
        eta.append(max(lam[i], g, params.xi))
    return LocalEstimates(lam=lam, gamma=gamma, eta=eta, x_max=x_max)


def characteristics(
    xs: Sequence[float],
    nus: Sequence[int],
    z: Sequence[float],
    eta: Sequence[float],
    r: float,
) -> np.ndarray:
    """``R[i-1]`` is the characteristic of interval ``[x_{i-1}, x_i]``."""
    xs, z, eta = (np.asarray(v, dtype=np.float64) for v in (xs, z, eta))
    nus = np.asarray(nus)
    dx = xs[1:] - xs[:-1]
    z0, z1 = z[:-1], z[1:]
    e0, e1 = eta[:-1], eta[1:]
    with np.errstate(all="ignore"):
        same = (e1 * z0 + e0 * z1 - r * e0 * e1 * dx) / (e1 + e0)
        up = z1 - r * e1 * (dx - z0 / (r * e0))
        down = z0 - r * e0 * (dx - z1 / (r * e1))
    n0, n1 = nus[:-1], nus[1:]
    return np.where(n0 == n1, same, np.where(n0 < n1, up, down))


def select_interval(R: Sequence[float]) -> int:
    """1-based index of the first minimal characteristic."""
    return int(np.argmin(np.asarray(R, dtype=np.float64))) + 1


def next_point(
    xs: Sequence[float],
    nus: Sequence[int],
    z: Sequence[float],
    eta: Sequence[float],
    t: int,
    r: float,
) -> float:
    """Point of the next trial inside interval ``t`` (1-based)."""
    x0, x1 = xs[t - 1], xs[t]
    if nus[t - 1] != nus[t]:
        return 0.5 * (x0 + x1)
    re0, re1 = r * eta[t - 1], r * eta[t]
    return (z[t - 1] - z[t] + re0 * x0 + re1 * x1) / (re1 + re0)


def step7_augment(
    xs: Sequence[float],
    nus: Sequence[int],
    x_new: float,
    nu_new: int,
    t: int,
    M: int,
    min_half: float = 0.0,
) -> list[float]:
    """Extra trial points after a trial at ``x_new`` taken from interval ``t``.

    ``xs``/``nus`` describe the sorted points *before* ``x_new`` was added
    and ``M`` is the maximal index before it. Midpoints whose half-interval
    is not longer than ``min_half`` are dropped.
    """
    pairs: list[tuple[float, float]] = []
    if nu_new > M:
        pairs = [(xs[t - 1], x_new), (x_new, xs[t])]
    elif nu_new < M:
        top = [i for i, nu in enumerate(nus) if nu == M]
        if len(top) == 1:
            # neighbours are taken in the sequence that already contains x_new
            seq = sorted(list(xs) + [x_new])
            T = seq.index(xs[top[0]])
            if T > 0:
                pairs.append((seq[T - 1], seq[T]))
            if T < len(seq) - 1:
                pairs.append((seq[T], seq[T + 1]))
    points = []
    for lo, hi in pairs:
        if 0.5 * (hi - lo) > min_half:
            points.append(0.5 * (lo + hi))
    return points


def index_search(
    p: ConstrainedProblem,
    params: AltParams,
    estimator: Callable[[SearchState, AltParams], Sequence[float]],
    method: str,
    diagnostics: bool = False,
    check: bool = False,
) -> SolveReport:
    """Run the index search loop with a pluggable per-point Lipschitz estimator.

    With ``check=True`` the structural invariants (sorted points, strictly
    interior new points, ``eta >= xi``, nondecreasing ``Lambda`` and
    record value for a fixed ``M``) are asserted on every iteration.
    """
    a, b = p.a, p.b
    tol = params.epsilon * (b - a)
    min_half = RESOLUTION * (b - a)
    state = init(p, params)
    diag: list[dict] = []
    status = None
    prev_M, prev_z_star = state.M, state.z_star
    prev_Lambda = list(state.Lambda)

    while True:
        recompute_z(state)
        xs, nus, z = state.xs, state.nus, state.z
        eta = estimator(state, params)
        R = characteristics(xs, nus, z, eta, params.r)
        t = select_interval(R)

        if check:
            _check_state(state, eta, params, prev_M, prev_z_star, prev_Lambda)
            prev_M, prev_z_star, prev_Lambda = state.M, state.z_star, list(state.Lambda)

        if diagnostics:
            diag.append({
                "k": len(state.history) - 1,
                "t": t,
                "R_min": float(R[t - 1]),
                "M": state.M,
                "z_star": state.z_star,
                "Lambda": list(state.Lambda),
            })

        width = xs[t] - xs[t - 1]
        if width <= tol:
            status = CONVERGED
            break
        if width <= 2 * min_half:
            log.warning("%s: selected interval below binary64 resolution", method)
            status = BUDGET_EXHAUSTED
            break
        if len(state.history) >= params.max_trials:
            status = BUDGET_EXHAUSTED
            break

        x_new = next_point(xs, nus, z, eta, t, params.r)
        if not xs[t - 1] < x_new < xs[t]:
            if check:
                raise InvariantError(
                    f"new point {x_new!r} outside ({xs[t - 1]!r}, {xs[t]!r})"
                )
            log.warning("%s: new point fell outside its interval", method)
            status = BUDGET_EXHAUSTED
            break
        M_old = state.M
        xs, nus = list(xs), list(nus)  # add_trial mutates the live lists
        rec = state.add_trial(x_new)

        for x_extra in step7_augment(xs, nus, x_new, rec.nu, t, M_old, min_half):
            if len(state.history) >= params.max_trials:
                break
            state.add_trial(x_extra)

    recompute_z(state)
    return _report(state, method, status, diag, params)


def _report(state, method, status, diag, params) -> SolveReport:
    p = state.problem
    best = min(
        (t for t in state.trials if t.nu == state.M), key=lambda t: t.last
    )
    if state.M < p.m + 1:
        status = NO_FEASIBLE
    return SolveReport(
        method=method,
        status=status,
        x_best=best.x,
        f_best=best.last,
        nu_best=best.nu,
        counters=state.counters,
        trace=list(state.history),
        diagnostics=diag,
        problem=p.name,
        epsilon=params.epsilon,
    )


def _check_state(state, eta, params, prev_M, prev_z_star, prev_Lambda):
    xs = state.xs
    if any(not x0 < x1 for x0, x1 in zip(xs, xs[1:])):
        raise InvariantError("trial points are not strictly increasing")
    if xs[0] != state.problem.a or xs[-1] != state.problem.b:
        raise InvariantError("trial sequence must span [a, b]")
    if any(not e >= params.xi for e in eta):
        raise InvariantError("eta fell below xi")
    if any(now < before for now, before in zip(state.Lambda, prev_Lambda)):
        raise InvariantError("Lambda decreased")
    if state.M == prev_M and state.z_star > prev_z_star:
        raise InvariantError("record value increased without a change of M")
    if state.M < prev_M:
        raise InvariantError("maximal index decreased")
    top = [zi for zi, nu in zip(state.z, state.nus) if nu == state.M]
    if min(top) != 0.0 or any(zi < 0 for zi in top):
        raise InvariantError("adjusted values at the maximal index are not anchored at 0")
    if any(zi <= 0 for zi, nu in zip(state.z, state.nus) if nu < state.M):
        raise InvariantError("violated constraint with non-positive value")


def alt_estimator(state: SearchState, params: AltParams) -> list[float]:
    return local_estimates(state, params).eta


def run(
    p: ConstrainedProblem,
    params: AltParams = AltParams(),
    diagnostics: bool = False,
    check: bool = False,
) -> SolveReport:
    """Minimize ``p`` with the local-tuning index algorithm."""
    return index_search(p, params, alt_estimator, "alt", diagnostics=diagnostics, check=check)
