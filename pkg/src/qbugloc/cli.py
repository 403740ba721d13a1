"""Command-line entry point: generate, locate, experiment, analyze."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .circuit import load_program, save_program
from .harness import ExperimentConfig, GenSpec, generate_program, inject_bug, run_experiment
from .locator import LocatorConfig, locate, locate_linear, locate_naive_binary
from .return_risk import risk_table
from .stattest import TestThresholds
from .tree import build_tree

LOG_ENV = "QBUGLOC_LOG_LEVEL"


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def cmd_generate(args):
    with open(args.spec, encoding="utf-8") as f:
        spec = GenSpec.from_dict(json.load(f))
    rng = np.random.default_rng(spec.seed if args.seed is None else args.seed)
    prog = generate_program(spec, rng)
    save_program(prog, args.out)
    if args.mutant_out:
        mutant, bug = inject_bug(prog, rng, args.delta)
        save_program(mutant, args.mutant_out)
        print(json.dumps(bug.to_dict()))
    return 0


def cmd_locate(args):
    reference = load_program(args.reference)
    mutant = load_program(args.mutant)
    thresholds = TestThresholds()
    if args.config:
        thresholds = ExperimentConfig.load(args.config).thresholds
    rng = np.random.default_rng(args.seed)
    tree = build_tree(reference)
    if args.dump_tree:
        _write(args.dump_tree, tree.to_json() + "\n")
    if args.method == "cost":
        result = locate(mutant, reference, tree, LocatorConfig(thresholds=thresholds), rng)
    elif args.method == "naive":
        result = locate_naive_binary(mutant, reference, thresholds, rng)
    else:
        result = locate_linear(mutant, reference, thresholds, rng)
    if args.trace:
        _write(args.trace, json.dumps(result.to_dict(), indent=2) + "\n")
    if result.failed:
        print(f"failed: {result.reason} (gates={result.trace.total_gates})")
        return 1
    print(f"located s_{result.located_segment} (gates={result.trace.total_gates})")
    return 0


def cmd_experiment(args):
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    report = run_experiment(config, parallelism=args.parallelism)
    _write(args.out, report.to_csv())
    if args.json:
        _write(args.json, report.to_json() + "\n")
    return 0


def cmd_analyze(args):
    rows = risk_table(args.l, args.x, args.w, args.alpha, args.beta)
    print(f"{'w':>3} {'alpha':>7} {'beta':>7} {'P(return)':>12}")
    for r in rows:
        print(f"{r['w']:>3} {r['alpha']:>7.3g} {r['beta']:>7.3g} {r['p_return']:>12.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbugloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a random segmented program")
    p.add_argument("--spec", required=True, help="JSON file with GenSpec fields")
    p.add_argument("--out", required=True, help="circuit file to write")
    p.add_argument("--mutant-out", help="also inject a bug and write the mutant here")
    p.add_argument("--delta", type=float, default=0.05, help="TVD visibility threshold")
    p.add_argument("--seed", type=int, help="overrides the spec's seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("locate", help="locate the buggy segment of a mutant")
    p.add_argument("--reference", required=True)
    p.add_argument("--mutant", required=True)
    p.add_argument("--method", choices=["cost", "naive", "linear"], default="cost")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the search trace as JSON")
    p.add_argument("--dump-tree", help="write the search tree as JSON")
    p.add_argument("--config", help="experiment config whose thresholds to use")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("experiment", help="compare the three methods on random programs")
    p.add_argument("--config", help="JSON experiment config (defaults if omitted)")
    p.add_argument("--out", required=True, help="CSV summary path, '-' for stdout")
    p.add_argument("--json", help="full JSON report path")
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", help="tabulate the probability of returning to a node")
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--x", type=int, default=4)
    p.add_argument("--w", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--alpha", type=float, nargs="+", default=[0.05, 0.1])
    p.add_argument("--beta", type=float, nargs="+", default=[0.2])
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
