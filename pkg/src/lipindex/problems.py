"""Constrained problem definitions, the JSON problem file format and fixtures."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .expr import Expr, Piecewise, parse_expr, to_text

__all__ = [
    "ConstrainedProblem",
    "ProblemSchemaError",
    "builtin_problem_6",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "save_problem",
    "get_problem",
    "BUILTIN_PROBLEMS",
]


class ProblemSchemaError(ValueError):
    """The problem definition violates the file schema or a problem invariant."""


@dataclass(frozen=True)
class ConstrainedProblem:
    """Minimize ``objective`` over [a, b] subject to ordered constraints ``g_j(x) <= 0``.

    Constraint ``j`` need only be defined where constraints ``1..j-1``
    hold; the objective only where all of them hold.
    """

    name: str
    domain: tuple[float, float]
    constraints: tuple[Expr, ...]
    objective: Expr
    known_minimizer: Optional[float] = None
    penalty_coefficient: Optional[float] = None
    lipschitz: Optional[tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        a, b = self.domain
        if not (math.isfinite(a) and math.isfinite(b)) or not b > a:
            raise ProblemSchemaError(f"domain must satisfy a < b, got [{a}, {b}]")
        if self.known_minimizer is not None and not a <= self.known_minimizer <= b:
            raise ProblemSchemaError("known minimizer lies outside the domain")
        if self.penalty_coefficient is not None and not self.penalty_coefficient > 0:
            raise ProblemSchemaError("penalty coefficient must be positive")
        if self.lipschitz is not None:
            if len(self.lipschitz) != self.m + 1:
                raise ProblemSchemaError(
                    f"expected {self.m + 1} Lipschitz constants, got {len(self.lipschitz)}"
                )
            if any(not k > 0 for k in self.lipschitz):
                raise ProblemSchemaError("Lipschitz constants must be positive")

    @property
    def m(self) -> int:
        """Number of constraints."""
        return len(self.constraints)

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    @property
    def functions(self) -> tuple[Expr, ...]:
        """``g_1, ..., g_m, f`` in evaluation order."""
        return self.constraints + (self.objective,)


_P6_THRESHOLDS = (3 * math.pi / 10, 9 * math.pi / 10)


def builtin_problem_6() -> ConstrainedProblem:
    """Test problem 6 of Famularo, Sergeyev and Pugliese (2002).

    Two multiextremal constraints on [0, 1.5*pi]; the feasible set is two
    disjoint intervals and the global minimizer sits near 3.76984.
    """
    objective = Piecewise(
        thresholds=_P6_THRESHOLDS,
        branches=(
            parse_expr("1/3 * (100/(9*pi^2) * x^2 + 1/2)"),
            parse_expr("5/3 * sin(20/3 * x) + 1/2"),
        ),
        otherwise=parse_expr("1/3 * (100/(9*pi^2) * x^2 - 80/(3*pi) * x + 33/2)"),
    )
    return ConstrainedProblem(
        name="p6",
        domain=(0.0, 1.5 * math.pi),
        constraints=(
            parse_expr("7/10 - abs(sin(3*x)^3 + cos(x)^3)"),
            parse_expr("-abs((x - pi)^3 / 100) + abs(cos(2*(x - pi))) - 1/2"),
        ),
        objective=objective,
        known_minimizer=3.76984,
        penalty_coefficient=15.0,
    )


BUILTIN_PROBLEMS = {"p6": builtin_problem_6, "6": builtin_problem_6}


def get_problem(name_or_path: str | Path) -> ConstrainedProblem:
    """Resolve a built-in name (``p6``) or load a JSON problem file."""
    key = str(name_or_path)
    if key in BUILTIN_PROBLEMS:
        return BUILTIN_PROBLEMS[key]()
    return load_problem(name_or_path)


def _expr_from_spec(spec: Any, where: str) -> Expr:
    if isinstance(spec, str):
        return parse_expr(spec)
    if isinstance(spec, dict) and set(spec) == {"piecewise"}:
        items = spec["piecewise"]
        if not isinstance(items, list) or len(items) < 2:
            raise ProblemSchemaError(f"{where}: piecewise needs branches and an else")
        *branches, last = items
        if not isinstance(last, dict) or set(last) != {"else"}:
            raise ProblemSchemaError(f"{where}: piecewise must end with an 'else' entry")
        thresholds, exprs = [], []
        for item in branches:
            if not isinstance(item, dict) or set(item) != {"if_x_le", "expr"}:
                raise ProblemSchemaError(f"{where}: piecewise branch needs 'if_x_le' and 'expr'")
            if isinstance(item["if_x_le"], bool) or not isinstance(item["if_x_le"], (int, float)):
                raise ProblemSchemaError(f"{where}: 'if_x_le' must be a number")
            thresholds.append(float(item["if_x_le"]))
            exprs.append(_expr_from_spec(item["expr"], where))
        try:
            return Piecewise(tuple(thresholds), tuple(exprs), _expr_from_spec(last["else"], where))
        except ValueError as exc:
            raise ProblemSchemaError(f"{where}: {exc}") from exc
    raise ProblemSchemaError(f"{where}: expression must be a string or a piecewise object")


def _expr_to_spec(e: Expr) -> Any:
    if isinstance(e, Piecewise):
        items: list[dict] = [
            {"if_x_le": t, "expr": to_text(br)} for t, br in zip(e.thresholds, e.branches)
        ]
        items.append({"else": to_text(e.otherwise)})
        return {"piecewise": items}
    return to_text(e)


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemSchemaError(f"{where} must be a number")
    return float(value)


def problem_from_dict(doc: dict) -> ConstrainedProblem:
    if not isinstance(doc, dict):
        raise ProblemSchemaError("problem document must be a JSON object")
    allowed = {"name", "domain", "constraints", "objective", "minimizer",
               "penalty_coefficient", "lipschitz"}
    unknown = set(doc) - allowed
    if unknown:
        raise ProblemSchemaError(f"unknown keys: {sorted(unknown)}")
    for key in ("name", "domain", "constraints", "objective"):
        if key not in doc:
            raise ProblemSchemaError(f"missing required key {key!r}")
    if not isinstance(doc["name"], str):
        raise ProblemSchemaError("name must be a string")
    domain = doc["domain"]
    if not isinstance(domain, list) or len(domain) != 2:
        raise ProblemSchemaError("domain must be a two-element list [a, b]")
    if not isinstance(doc["constraints"], list):
        raise ProblemSchemaError("constraints must be a list")
    lipschitz = doc.get("lipschitz")
    if lipschitz is not None:
        if not isinstance(lipschitz, list):
            raise ProblemSchemaError("lipschitz must be a list of numbers")
        lipschitz = tuple(_number(v, "lipschitz entry") for v in lipschitz)
    minimizer = doc.get("minimizer")
    pstar = doc.get("penalty_coefficient")
    return ConstrainedProblem(
        name=doc["name"],
        domain=(_number(domain[0], "domain[0]"), _number(domain[1], "domain[1]")),
        constraints=tuple(
            _expr_from_spec(c, f"constraint {j + 1}") for j, c in enumerate(doc["constraints"])
        ),
        objective=_expr_from_spec(doc["objective"], "objective"),
        known_minimizer=None if minimizer is None else _number(minimizer, "minimizer"),
        penalty_coefficient=None if pstar is None else _number(pstar, "penalty_coefficient"),
        lipschitz=lipschitz,
    )


def problem_to_dict(p: ConstrainedProblem) -> dict:
    doc: dict[str, Any] = {
        "name": p.name,
        "domain": [p.a, p.b],
        "constraints": [_expr_to_spec(c) for c in p.constraints],
        "objective": _expr_to_spec(p.objective),
    }
    if p.known_minimizer is not None:
        doc["minimizer"] = p.known_minimizer
    if p.penalty_coefficient is not None:
        doc["penalty_coefficient"] = p.penalty_coefficient
    if p.lipschitz is not None:
        doc["lipschitz"] = list(p.lipschitz)
    return doc


def load_problem(path: str | Path) -> ConstrainedProblem:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemSchemaError(f"{path}: invalid JSON: {exc}") from exc
    return problem_from_dict(doc)


def save_problem(p: ConstrainedProblem, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(p), fh, indent=2)
        fh.write("\n")
