"""Univariate Lipschitz global optimization with ordered, partially defined constraints."""

from .alt import AltParams, SolveReport, run
from .baselines import estimate_lipschitz, ibba_variant_run, pen_run, pijavskii_run
from .expr import EvaluationError, ExprSyntaxError, eval_expr, parse_expr
from .harness import RunSpec, bench_suite, grid_oracle, run_experiment
from .index import EvalCounters, TrialRecord, evaluate_indexed
from .problems import ConstrainedProblem, builtin_problem_6, load_problem, save_problem

__version__ = "0.1.0"

__all__ = [
    "AltParams", "SolveReport", "run",
    "estimate_lipschitz", "ibba_variant_run", "pen_run", "pijavskii_run",
    "EvaluationError", "ExprSyntaxError", "eval_expr", "parse_expr",
    "RunSpec", "bench_suite", "grid_oracle", "run_experiment",
    "EvalCounters", "TrialRecord", "evaluate_indexed",
    "ConstrainedProblem", "builtin_problem_6", "load_problem", "save_problem",
]
