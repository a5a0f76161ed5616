"""Command line entry point: ``lipindex run|bench|oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .expr import EvaluationError, ExprSyntaxError
from .harness import RunSpec, bench_suite, grid_oracle, run_experiment
from .problems import ProblemSchemaError, get_problem


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipindex", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one problem with one method")
    run.add_argument("--problem", required=True, help="built-in name (p6) or JSON file")
    run.add_argument("--method", required=True, choices=["alt", "ibba", "pen"])
    run.add_argument("--eps", type=float, required=True)
    run.add_argument("--r", type=float, default=1.3)
    run.add_argument("--xi", type=float, default=1e-6)
    run.add_argument("--pstar", type=float, default=None)
    run.add_argument("--K", type=_floats, default=None, help="comma-separated constants (ibba)")
    run.add_argument("--max-trials", type=int, default=1_000_000)
    run.add_argument("--trace")
    run.add_argument("--summary")
    run.add_argument("--diagnostics", action="store_true")

    bench = sub.add_parser("bench", help="run a method x problem x epsilon grid")
    bench.add_argument("--problems", type=_names, default=["p6"])
    bench.add_argument("--methods", type=_names, default=["alt", "ibba", "pen"])
    bench.add_argument("--eps", type=_floats, default=[1e-4, 1e-5])
    bench.add_argument("--r", type=float, default=1.3)
    bench.add_argument("--xi", type=float, default=1e-6)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--out", required=True)

    oracle = sub.add_parser("oracle", help="brute-force grid minimum")
    oracle.add_argument("--problem", required=True)
    oracle.add_argument("--grid", type=int, default=10**7)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            spec = RunSpec(
                problem=args.problem, method=args.method, epsilon=args.eps, r=args.r,
                xi=args.xi, P_star=args.pstar, K=tuple(args.K) if args.K else None,
                max_trials=args.max_trials, trace=args.trace, summary=args.summary,
                diagnostics=args.diagnostics,
            )
            row = run_experiment(spec)
            print(json.dumps({
                "problem": row.problem, "method": row.method, "epsilon": row.epsilon,
                "status": row.status, "x_best": row.x_best, "f_best": row.f_best,
                "per_level": row.per_level, "trials": row.trials, "evals": row.evals,
            }))
        elif args.command == "bench":
            specs = [
                RunSpec(problem=p, method=m, epsilon=e, r=args.r, xi=args.xi)
                for p in args.problems for m in args.methods for e in args.eps
            ]
            rows = bench_suite(specs, args.out, jobs=args.jobs)
            for row in rows:
                print(f"{row.problem:>8} {row.method:>5} eps={row.epsilon:g} "
                      f"trials={row.trials} evals={row.evals} status={row.status}")
        else:
            res = grid_oracle(get_problem(args.problem), args.grid)
            print(json.dumps({"feasible": res.feasible, "x_ref": res.x_ref, "f_ref": res.f_ref}))
    except (ProblemSchemaError, ExprSyntaxError, EvaluationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
