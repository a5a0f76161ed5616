"""Small expression language for univariate problem functions.

Expressions are immutable trees evaluated exactly as parsed (no
re-association), so repeated runs produce bit-identical values.
Evaluation works on Python floats and, for grid scans, on numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Pi",
    "Var",
    "Unary",
    "Binary",
    "Piecewise",
    "ExprSyntaxError",
    "EvaluationError",
    "parse_expr",
    "eval_expr",
    "eval_array",
    "to_text",
]


class ExprSyntaxError(ValueError):
    """Raised when an expression string does not conform to the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvaluationError(ArithmeticError):
    """Raised when evaluation produces a non-finite or undefined value."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # neg | abs | sin | cos
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # add | sub | mul | div | pow
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Piecewise:
    """Branch ``i`` applies when ``x <= thresholds[i]`` and no earlier branch did."""

    thresholds: tuple[float, ...]
    branches: tuple["Expr", ...]
    otherwise: "Expr"

    def __post_init__(self):
        if len(self.thresholds) != len(self.branches):
            raise ValueError("piecewise needs one branch per threshold")
        if not self.thresholds:
            raise ValueError("piecewise needs at least one threshold")
        for lo, hi in zip(self.thresholds, self.thresholds[1:]):
            if not lo < hi:
                raise ValueError(
                    f"piecewise thresholds must strictly increase, got {lo} then {hi}"
                )


Expr = Union[Const, Pi, Var, Unary, Binary, Piecewise]

_FUNCTIONS = ("abs", "sin", "cos")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary (('*'|'/') unary)*
    # unary  := ('-'|'+') unary | power
    # power  := atom ('^' unary)?
    # atom   := number | pi | x | func '(' expr ')' | '(' expr ')'

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Unary("neg", self.unary())
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("pow", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text == "x":
                return Var()
            if text == "pi":
                return Pi()
            if text in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse_expr(text: str) -> Expr:
    """Parse a grammar string such as ``"0.7 - abs(sin(3*x)^3 + cos(x)^3)"``."""
    return _Parser(text).parse()


def _pow(base: float, exponent: float) -> float:
    if base == 0.0 and exponent < 0:
        raise EvaluationError("0 raised to a negative power")
    return math.pow(base, exponent)


def eval_expr(e: Expr, x: float) -> float:
    """Evaluate ``e`` at the scalar ``x``.

    Raises:
        EvaluationError: on division by zero, invalid powers, or any
            non-finite intermediate value.
    """
    try:
        value = _eval(e, float(x))
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise EvaluationError(f"evaluation failed at x={x!r}: {exc}") from exc
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite value at x={x!r}")
    return value


def _eval(e: Expr, x: float) -> float:
    if isinstance(e, Var):
        return x
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Unary):
        a = _eval(e.arg, x)
        if e.op == "neg":
            return -a
        if e.op == "abs":
            return abs(a)
        if e.op == "sin":
            return math.sin(a)
        if e.op == "cos":
            return math.cos(a)
        raise ValueError(f"unknown unary op {e.op}")
    if isinstance(e, Binary):
        a = _eval(e.left, x)
        b = _eval(e.right, x)
        if e.op == "add":
            return a + b
        if e.op == "sub":
            return a - b
        if e.op == "mul":
            return a * b
        if e.op == "div":
            if b == 0.0:
                raise EvaluationError("division by zero")
            return a / b
        if e.op == "pow":
            return _pow(a, b)
        raise ValueError(f"unknown binary op {e.op}")
    if isinstance(e, Piecewise):
        for threshold, branch in zip(e.thresholds, e.branches):
            if x <= threshold:
                return _eval(branch, x)
        return _eval(e.otherwise, x)
    raise TypeError(f"not an expression node: {e!r}")


def eval_array(e: Expr, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over a float64 array (used by grid scans)."""
    xs = np.asarray(xs, dtype=np.float64)
    with np.errstate(all="ignore"):
        out = np.asarray(_eval_np(e, xs), dtype=np.float64)
    out = np.broadcast_to(out, xs.shape).copy()
    if not np.all(np.isfinite(out)):
        bad = xs[~np.isfinite(out)][0]
        raise EvaluationError(f"non-finite value at x={bad!r}")
    return out


def _eval_np(e: Expr, xs: np.ndarray):
    if isinstance(e, Var):
        return xs
    if isinstance(e, Const):
        return np.float64(e.value)
    if isinstance(e, Pi):
        return np.float64(math.pi)
    if isinstance(e, Unary):
        a = _eval_np(e.arg, xs)
        return {"neg": np.negative, "abs": np.abs, "sin": np.sin, "cos": np.cos}[e.op](a)
    if isinstance(e, Binary):
        a = _eval_np(e.left, xs)
        b = _eval_np(e.right, xs)
        if e.op == "div":
            if np.any(np.asarray(b) == 0.0):
                raise EvaluationError("division by zero")
            return a / b
        if e.op == "pow":
            if np.any((np.asarray(a) == 0.0) & (np.asarray(b) < 0)):
                raise EvaluationError("0 raised to a negative power")
            return np.power(a, b)
        return {"add": np.add, "sub": np.subtract, "mul": np.multiply}[e.op](a, b)
    if isinstance(e, Piecewise):
        out = np.broadcast_to(_eval_np(e.otherwise, xs), xs.shape).astype(np.float64)
        taken = np.zeros(xs.shape, dtype=bool)
        for threshold, branch in zip(e.thresholds, e.branches):
            sel = (xs <= threshold) & ~taken
            if np.any(sel):
                out[sel] = np.broadcast_to(_eval_np(branch, xs[sel]), (int(sel.sum()),))
            taken |= sel
        return out
    raise TypeError(f"not an expression node: {e!r}")


_BINARY_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_text(e: Expr) -> str:
    """Emit a grammar string that parses back to an equal tree.

    Piecewise nodes have no inline syntax; use the problem file format.
    """
    return _emit(e)


def _emit(e: Expr) -> str:
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Const):
        if e.value < 0 or not math.isfinite(e.value):
            raise ValueError(f"constant {e.value!r} has no literal form")
        return repr(e.value)
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = _emit(e.arg)
            # a negated power or atom binds tighter than neg; anything else needs parens
            if _prec(e.arg) < _PRECEDENCE["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({_emit(e.arg)})"
    if isinstance(e, Binary):
        p = _PRECEDENCE[e.op]
        left, right = _emit(e.left), _emit(e.right)
        if e.op == "pow":
            # left-hand side must be an atom; right side is parsed as unary
            if _prec(e.left) <= p:
                left = f"({left})"
            if _prec(e.right) < _PRECEDENCE["neg"]:
                right = f"({right})"
        else:
            if _prec(e.left) < p:
                left = f"({left})"
            # left-associative: equal precedence on the right needs parens
            if _prec(e.right) <= p:
                right = f"({right})"
        return f"{left} {_BINARY_SYMBOL[e.op]} {right}"
    if isinstance(e, Piecewise):
        raise ValueError("piecewise expressions have no inline text form")
    raise TypeError(f"not an expression node: {e!r}")


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PRECEDENCE[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PRECEDENCE["neg"]
    return 5
