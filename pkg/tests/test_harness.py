import csv
import json
import math

import pytest

from lipindex import cli
from lipindex.expr import parse_expr
from lipindex.harness import (
    SUMMARY_COLUMNS, RunSpec, SummaryRow, bench_suite, grid_oracle, ratio_table,
    run_experiment,
)
from lipindex.problems import ConstrainedProblem, save_problem

from conftest import TRUE_XSTAR, unconstrained


def test_oracle_quick_problem6(p6):
    res = grid_oracle(p6, 10**5)
    assert res.feasible
    assert abs(res.x_ref - TRUE_XSTAR) <= p6.b / (10**5 - 1)


def test_oracle_infeasible():
    p = ConstrainedProblem("never", (0.0, 1.0), (parse_expr("1"),), parse_expr("x"))
    assert not grid_oracle(p, 1001).feasible


def test_oracle_hits_grid_minimizer():
    res = grid_oracle(unconstrained("(x - 0.5)^2"), 10001)
    assert res.x_ref == 0.5 and res.f_ref == 0.0


def test_oracle_respects_partial_definition():
    # g_2 is undefined (division by zero) exactly where g_1 is violated
    g1 = parse_expr("x - 0.5")
    g2 = parse_expr("1 / (x - 0.75) - 100")
    p = ConstrainedProblem("partial", (0.0, 0.5), (g1, g2), parse_expr("-x"))
    res = grid_oracle(p, 11)
    assert res.feasible and res.x_ref == 0.5


def test_run_experiment_alt(p6):
    row = run_experiment(RunSpec("p6", "alt", 1e-4))
    assert (row.trials, row.evals) == (74, 169)
    assert row.per_level == [21, 11, 42]


def test_run_experiment_pen_accounting():
    row = run_experiment(RunSpec("p6", "pen", 1e-4, P_star=15))
    assert row.evals == 3 * row.trials


def test_ibba_evals_identity():
    row = run_experiment(RunSpec("p6", "ibba", 1e-4))
    n1, n2, nf = row.per_level
    assert row.evals == n1 + 2 * n2 + 3 * nf
    assert row.trials == n1 + n2 + nf


def test_unknown_method():
    with pytest.raises(ValueError):
        RunSpec("p6", "newton", 1e-4)


def test_run_writes_trace_and_summary(tmp_path):
    spec = RunSpec("p6", "alt", 1e-4, trace=str(tmp_path / "t.jsonl"),
                   summary=str(tmp_path / "s.csv"), diagnostics=True)
    run_experiment(spec)
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert len(lines) == 74
    first = json.loads(lines[0])
    assert set(first) == {"method", "k", "x", "nu", "values"}
    assert first["k"] == 0 and first["x"] == 0.0 and len(first["values"]) == first["nu"]
    diag = [json.loads(l) for l in (tmp_path / "t.jsonl.diag").read_text().splitlines()]
    assert set(diag[0]) == {"k", "t", "R_min", "M", "z_star", "Lambda"}
    rows = list(csv.reader((tmp_path / "s.csv").open()))
    assert rows[0] == SUMMARY_COLUMNS
    assert rows[1][:9] == ["p6", "alt", "0.0001", "21", "11", "-", "42", "74", "169"]


def row(problem, method, eps, trials, evals):
    return SummaryRow(problem, method, eps, [trials], trials, evals, 0.0, 0.0, "converged")


def test_ratio_paper_instance():
    header, table = ratio_table([row("6", "alt", 1e-4, 74, 169), row("6", "pen", 1e-4, 909, 2727),
                                 row("6", "ibba", 1e-4, 629, 1839)])
    assert header == ["problem", "trials_pen/alt@0.0001", "trials_ibba/alt@0.0001",
                      "evals_pen/alt@0.0001", "evals_ibba/alt@0.0001"]
    assert table[0] == ["6", "12.28", "8.50", "16.14", "10.88"]
    assert table[-1][0] == "Av."


def test_ratio_single_spec_is_empty():
    assert ratio_table([row("6", "alt", 1e-4, 74, 169)])[1] == []


def test_ratio_identical_runs():
    a = run_experiment(RunSpec("p6", "alt", 1e-4))
    b = run_experiment(RunSpec("p6", "alt", 1e-4))
    assert a.trials / b.trials == 1.0 and a.evals / b.evals == 1.0


def test_bench_outputs(tmp_path):
    rows = bench_suite([RunSpec("p6", m, 1e-3) for m in ("pen", "alt", "ibba")], tmp_path)
    assert [r.method for r in rows] == ["alt", "ibba", "pen"]
    assert (tmp_path / "summary.csv").exists() and (tmp_path / "ratios.csv").exists()
    assert len(list((tmp_path / "traces").glob("*.jsonl"))) == 3


def test_bench_parallel_matches_serial(tmp_path):
    specs = [RunSpec("p6", m, 1e-3) for m in ("alt", "ibba", "pen")]
    bench_suite(specs, tmp_path / "a", jobs=1)
    bench_suite(specs, tmp_path / "b", jobs=2)
    for name in ("summary.csv", "ratios.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bench_requires_specs():
    with pytest.raises(ValueError):
        bench_suite([])


# --- CLI --------------------------------------------------------------------

def test_cli_run(capsys, tmp_path):
    assert cli.main(["run", "--problem", "p6", "--method", "alt", "--eps", "1e-4",
                     "--trace", str(tmp_path / "t.jsonl")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["trials"] == 74 and out["status"] == "converged"


def test_cli_run_problem_file(capsys, tmp_path):
    path = tmp_path / "q.json"
    save_problem(unconstrained("(x - 0.25)^2", name="q"), path)
    assert cli.main(["run", "--problem", str(path), "--method", "ibba", "--eps", "1e-3",
                     "--K", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["x_best"] - 0.25) <= 1e-3


def test_cli_oracle(capsys):
    assert cli.main(["oracle", "--problem", "p6", "--grid", "100001"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["feasible"] and abs(out["x_ref"] - TRUE_XSTAR) < 1e-4


def test_cli_bench(capsys, tmp_path):
    assert cli.main(["bench", "--problems", "p6", "--methods", "alt,pen", "--eps", "1e-3",
                     "--out", str(tmp_path)]) == 0
    assert "trials=" in capsys.readouterr().out
    assert (tmp_path / "ratios.csv").read_text().startswith("problem,trials_pen/alt@0.001")


def test_cli_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "b", "domain": [1, 0], "constraints": [], "objective": "x"}')
    assert cli.main(["run", "--problem", str(bad), "--method", "alt", "--eps", "1e-3"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_missing_file(capsys):
    assert cli.main(["oracle", "--problem", "/nonexistent.json"]) == 2
