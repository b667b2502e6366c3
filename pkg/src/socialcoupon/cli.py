"""Command line entry point: ``run``, ``oracle-check`` and ``gen``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import _kernels
from .graph import GraphFormatError, generate_synthetic, load_edge_list, write_economics, write_edge_list
from .harness import ConfigError, emit_csv, parse_config, run_experiment
from .maneuver import run_s3ca
from .oracle import ExactEstimator, InstanceTooLarge, approximation_bound, bound_inputs, optimal_deployment
from .propagation import deployment_rate

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _cmd_run(args) -> int:
    path = Path(args.config)
    with open(path, "rb") as fh:
        config = parse_config(fh, base_dir=path.parent)
    rows = run_experiment(config)
    if config.output_path:
        with open(config.output_path, "wb") as out:
            emit_csv(rows, out)
    else:
        emit_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    if not args.budget > 0:
        raise ConfigError("budget must be positive")
    with open(args.graph, "rb") as fh:
        if args.economics:
            with open(args.economics, "rb") as econ:
                graph = load_edge_list(fh, econ)
        else:
            graph = load_edge_list(fh)
    best, best_rate = optimal_deployment(graph, args.budget)
    estimator = ExactEstimator(max_edges=graph.n_edges)
    found = run_s3ca(graph, args.budget, estimator).deployment
    found_rate = deployment_rate(estimator, graph, found)
    bound = approximation_bound(bound_inputs(graph, args.epsilon))
    print(f"optimal   {best_rate:.6g}  {best}")
    print(f"s3ca      {found_rate:.6g}  {found}")
    ratio = found_rate / best_rate if best_rate > 0 else 1.0
    print(f"ratio     {ratio:.6g}  (worst-case bound {bound:.6g})")
    return EXIT_OK


def _cmd_gen(args) -> int:
    params = {}
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key.strip()}: expected a number, got {value!r}") from None
    try:
        graph = generate_synthetic(args.kind, args.n, params, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    econ = Path(args.economics) if args.economics else out.with_suffix(".economics.csv")
    with open(out, "w") as fh:
        write_edge_list(graph, fh, with_probs=True)
    with open(econ, "w") as fh:
        write_economics(graph, fh)
    print(f"wrote {graph.n_nodes} nodes / {graph.n_edges} edges to {out} (economics: {econ})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialcoupon", description="Seed and social coupon deployment experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and write CSV metrics")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("oracle-check", help="compare the heuristic to the exhaustive optimum on a tiny graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--budget", required=True, type=float)
    p.add_argument("--economics", default=None)
    p.add_argument("--epsilon", default=0.0, type=float)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("gen", help="write a synthetic graph and its economics file")
    p.add_argument("--kind", required=True, choices=["uniform-random", "power-law"])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--economics", default=None, help="economics path (default: <out>.economics.csv)")
    p.add_argument("--param", action="append", help="generator parameter key=value (repeatable)")
    p.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _kernels.configure_workers()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError, InstanceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
