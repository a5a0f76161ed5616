"""Index scheme trials: evaluate constraints in order, stop at the first violation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import EvaluationError, eval_expr
from .problems import ConstrainedProblem

__all__ = ["TrialRecord", "EvalCounters", "TrialError", "evaluate_indexed"]


class TrialError(EvaluationError):
    """A function in the constraint chain could not be evaluated."""

    def __init__(self, level: int, x: float, cause: Exception):
        super().__init__(f"evaluation of g_{level} failed at x={x!r}: {cause}")
        self.level = level
        self.x = x


@dataclass(frozen=True)
class TrialRecord:
    x: float
    nu: int
    values: tuple[float, ...]
    k: int = 0

    @property
    def last(self) -> float:
        """Value of the last evaluated function, ``g_nu(x)``."""
        return self.values[-1]

    def to_json(self) -> dict:
        return {"k": self.k, "x": self.x, "nu": self.nu, "values": list(self.values)}


@dataclass
class EvalCounters:
    """Per-level trial counts; ``per_level[j-1]`` counts trials that stopped at ``g_j``.

    The last entry is ``N_f`` (trials that reached the objective).
    """

    m: int
    per_level: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.per_level:
            self.per_level = [0] * (self.m + 1)

    def record(self, nu: int) -> None:
        self.per_level[nu - 1] += 1

    @property
    def n_f(self) -> int:
        return self.per_level[-1]

    @property
    def total_trials(self) -> int:
        return sum(self.per_level)

    @property
    def weighted_evals(self) -> int:
        return sum(j * n for j, n in enumerate(self.per_level, start=1))


def evaluate_indexed(
    p: ConstrainedProblem, x: float, counters: EvalCounters | None = None, k: int = 0
) -> TrialRecord:
    """Execute one trial at ``x``.

    Functions above the returned index are never evaluated. Feasibility is
    the exact comparison ``g_j(x) <= 0``.
    """
    values = []
    functions = p.functions
    for level, g in enumerate(functions, start=1):
        try:
            v = eval_expr(g, x)
        except EvaluationError as exc:
            raise TrialError(level, x, exc) from exc
        values.append(v)
        if level <= p.m and v > 0:
            break
    nu = len(values)
    if counters is not None:
        counters.record(nu)
    return TrialRecord(x=x, nu=nu, values=tuple(values), k=k)
