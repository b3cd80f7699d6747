"""Command line entry point ``mcbo``."""

from __future__ import annotations

import argparse
import csv
import sys

from . import __version__
from .experiment import parse_config, run_experiment, write_outputs
from .problems import PROBLEM_NAMES, get_problem, oracle_reference_set
from .scalarization import check_order, generate_uniform_weights


def _cmd_run(args):
    with open(args.config) as fh:
        text = fh.read()
    config = parse_config(text, {"out": args.out, "runs": args.runs, "seed": args.seed})
    records, summary = run_experiment(config, n_jobs=args.jobs)
    for path in write_outputs(records, summary, config):
        print(path)
    for name, mean in summary.means.items():
        print(f"{name}: k=0 {mean[0]:.6g}  k={config.k_max} {mean[-1]:.6g}")
    return 0


def _cmd_oracle(args):
    problem = get_problem(args.problem, args.d)
    p = check_order(args.p)
    weights = generate_uniform_weights(args.n, problem.m)
    ref = oracle_reference_set(problem, weights, p, args.budget)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        m, d = problem.m, problem.d
        writer.writerow(
            [f"w_{k + 1}" for k in range(m)] + [f"x_{k + 1}" for k in range(d)] + [f"g_{k + 1}" for k in range(m)]
        )
        for w, x, g in zip(ref.weights, ref.positions, ref.images):
            writer.writerow([format(float(v), ".17g") for v in (*w, *x, *g)])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_problems(args):
    for name in PROBLEM_NAMES:
        prob = get_problem(name)
        front = "analytic front" if prob.front is not None else "oracle front"
        scalable = "fixed d=2" if name == "problem1" else "d configurable"
        print(f"{name:<10} d={prob.d} m={prob.m} {scalable}, {front}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mcbo", description="Multi-objective consensus-based optimization")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides 'out')")
    p_run.add_argument("--runs", type=int, default=None, help="number of runs (overrides 'runs')")
    p_run.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="master seed (overrides 'seed')")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel runs; output is identical for any value")
    p_run.set_defaults(func=_cmd_run)

    p_or = sub.add_parser("oracle", help="print ground-truth sub-problem solutions as CSV")
    p_or.add_argument("problem")
    p_or.add_argument("n", type=int, metavar="N")
    p_or.add_argument("p", help="scalarization order, a real >= 1 or 'inf'")
    p_or.add_argument("--d", type=int, default=None)
    p_or.add_argument("--budget", type=int, default=10_000)
    p_or.add_argument("--out", default=None, help="write to a file instead of stdout")
    p_or.set_defaults(func=_cmd_oracle)

    p_list = sub.add_parser("problems", help="list built-in problems")
    p_list.set_defaults(func=_cmd_problems)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"mcbo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
