import math

import pytest

from lipindex.problems import ConstrainedProblem, builtin_problem_6
from lipindex.expr import parse_expr

# 40-digit mpmath evaluations of the problem-6 functions, rounded to binary64
G1_AT_XSTAR = -0.6900083768846813661833073648522520920947
G2_AT_XSTAR = -0.1933272673145109860171461809272488863162
F_AT_XSTAR = 0.1666666685682047268712644302729118421617
G2_AT_0 = 0.1899372331970017982452368493289860479777
G1_AT_08 = 0.05363797742386237740342586350688507108959
G2_AT_B = 0.4612421541496252247806546061661232559972
PEN_AT_0 = 3.015725164621693640345219406601457386333

PAPER_XSTAR = 3.76984
TRUE_XSTAR = 1.2 * math.pi


@pytest.fixture
def p6():
    return builtin_problem_6()


def unconstrained(text, domain=(0.0, 1.0), name="u"):
    return ConstrainedProblem(name=name, domain=domain, constraints=(), objective=parse_expr(text))


# (criterion id, description, passed, detail) appended by test_acceptance
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    def order(line):
        cid = line[0]
        digits = cid.rstrip("abcdefghijklmnopqrstuvwxyz")
        return int(digits), cid[len(digits):]

    for cid, text, ok, detail in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid:>3} {text}: {detail}")
