"""Command-line front end: generate graphs, route, run oracles and experiments.

Exit codes: 0 success, 1 usage error, 2 oracle/assertion failure, 3 I/O
error, so the oracles double as CI gates.  The master seed comes from
--seed, falling back to the NAVGRAPH_SEED environment variable, then 0;
every run echoes an invocation line it can be reproduced from.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import harness, oracle
from .construction import (Seed, load_permutation, read_edge_list,
                           thin_edges, write_edge_list)
from .routing import RoutingMode, route

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSERTION = 2
EXIT_IO = 3

_MODE_CHOICES = ("greedy-1", "greedy-2", "half-greedy-1", "half-greedy-2",
                 "combined", "combined-literal-m")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("NAVGRAPH_SEED")
    return int(env) if env else 0


def _echo(argv: list[str], seed: int | None) -> None:
    line = "navgraph " + " ".join(argv)
    if seed is not None and "--seed" not in argv:
        line += f" --seed {seed}"
    print(f"# {line}")


def _model_params(args) -> dict:
    params: dict = {}
    if getattr(args, "branching", None):
        params["branching"] = args.branching
    if getattr(args, "grid_dims", None):
        params["grid_dims"] = [int(d) for d in args.grid_dims.split(",")]
    if getattr(args, "toric", False):
        params["toric"] = True
    if getattr(args, "alpha", None) is not None:
        params["alpha"] = args.alpha
    if getattr(args, "links", None) is not None:
        params["links"] = args.links
    if getattr(args, "space_kind", None):
        # baseline models take their base space as a descriptor
        space: dict = {"kind": args.space_kind}
        if args.space_kind == "grid":
            if params.get("grid_dims"):
                space["dims"] = params["grid_dims"]
            if params.get("toric"):
                space["toric"] = True
        elif args.space_kind == "tree" and params.get("branching"):
            space["branching"] = params["branching"]
        params["space"] = space
    return params


def _explicit_pi(args, n: int) -> np.ndarray | None:
    if getattr(args, "identity_pi", False):
        return np.arange(n)
    if getattr(args, "pi_file", None):
        return load_permutation(args.pi_file)
    return None


def _build_from_args(args, seed: int):
    params = _model_params(args)
    pi = _explicit_pi(args, args.n)
    return harness.build_model(args.model, params, args.n, Seed(seed), pi=pi)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_generate(args, argv) -> int:
    seed = _resolve_seed(args.seed)
    _echo(argv, seed)
    assignment, graph = _build_from_args(args, seed)
    if args.thin:
        graph = thin_edges(graph, assignment.space1, Seed(seed))
    write_edge_list(graph, args.out)
    print(f"model: {args.model}")
    print(f"vertices: {graph.n}")
    print(f"edges: {graph.edge_count()}")
    print(f"mean out-degree: {graph.mean_out_degree():.4f}")
    print(f"wrote: {args.out}")
    return EXIT_OK


def _cmd_route(args, argv) -> int:
    seed = _resolve_seed(args.seed)
    _echo(argv, seed)
    assignment, graph = _build_from_args(args, seed)
    if args.edges:
        graph = read_edge_list(args.edges, n=args.n)
    for v in (args.source, args.target):
        if not 0 <= v < graph.n:
            raise _UsageError(f"vertex {v} out of range [0, {graph.n})")
    mode = RoutingMode.parse(args.mode)
    if args.plateau != "auto":
        mode = RoutingMode(mode.kind, mode.space, args.plateau == "on",
                           args.max_steps, mode.literal_m)
    elif args.max_steps is not None:
        mode = RoutingMode(mode.kind, mode.space, mode.plateau,
                           args.max_steps, mode.literal_m)
    outcome = route(graph, assignment, mode, args.source, args.target)
    print(f"mode: {mode.label}")
    print("path: " + " -> ".join(str(v) for v in outcome.path))
    print(f"steps: {outcome.steps}")
    print(f"success: {'yes' if outcome.success else 'no'}"
          + ("" if outcome.success else f" ({outcome.failure.value})"))
    if outcome.phase_steps:
        phases = " ".join(f"{i}:{c}" for i, c in sorted(outcome.phase_steps.items()))
        print(f"phase steps: {phases}")
    return EXIT_OK


def _fail(message: str) -> int:
    print(f"FAILED: {message}", file=sys.stderr)
    return EXIT_ASSERTION


def _cmd_oracle(args, argv) -> int:
    if args.oracle_cmd == "marginal":
        _echo(argv, None)
        report = oracle.marginal_edge_law(args.n)
        print(report.table())
        if args.csv:
            report.write_csv(args.csv)
        if not report.all_exact:
            bad = [r for r in report.rows if not r.exact][0]
            return _fail(f"edge frequency to y={bad.head} is {bad.probability}, "
                         f"expected {bad.expected}")
        return EXIT_OK
    if args.oracle_cmd == "monotonicity":
        _echo(argv, None)
        report = oracle.monotonicity_check(args.n)
        print(report.table())
        if args.csv:
            report.write_csv(args.csv)
        if report.violations:
            ex = report.examples[0]
            return _fail(f"{report.violations} monotonicity violations, e.g. "
                         f"pi={ex.pi} {ex.source}->{ex.target}")
        print("0 violations")
        return EXIT_OK
    if args.oracle_cmd == "divergence":
        _echo(argv, None)
        witness = oracle.find_divergent_permutation(args.n_max)
        if witness is None:
            return _fail(f"no divergent permutation up to n={args.n_max}")
        print(witness.table())
        if args.csv:
            witness.write_csv(args.csv)
        return EXIT_OK
    if args.oracle_cmd == "tau":
        seed = _resolve_seed(args.seed)
        _echo(argv, seed)
        set_a, set_b = oracle.random_disjoint_sets(args.n, args.set_size,
                                                   args.set_size, Seed(seed))
        report = oracle.tau_tail(args.n, set_a, set_b, args.samples, Seed(seed))
        print(report.table())
        if args.csv:
            report.write_csv(args.csv)
        if not report.passed:
            return _fail(f"tau tail checks failed: P(tau=1)={report.tau1_probability:.4f} "
                         f"needs >= {report.p_lower:.4f}, "
                         f"nonincreasing={report.tail_nonincreasing}")
        return EXIT_OK
    if args.oracle_cmd == "degree":
        seed = _resolve_seed(args.seed)
        _echo(argv, seed)
        expected = sum(1.0 / k for k in range(1, args.n))  # harmonic oracle first
        means = []
        for i in range(args.seeds):
            _, graph = harness.build_model(
                "independent-interest", {"space": {"kind": "directed-cycle"}},
                args.n, Seed(seed + i))
            means.append(oracle.degree_statistics(graph).mean)
        observed = sum(means) / len(means)
        rel = abs(observed - expected) / expected
        print(f"independent interest on a directed cycle, n={args.n}, "
              f"{args.seeds} seeds")
        print(f"mean out-degree: {observed:.4f} (harmonic oracle {expected:.4f}, "
              f"relative error {rel:.3%})")
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["seed", "mean_outdeg"])
                writer.writerows([seed + i, repr(m)] for i, m in enumerate(means))
        if rel > args.tolerance:
            return _fail(f"mean degree {observed:.4f} deviates {rel:.3%} from "
                         f"harmonic value {expected:.4f} (> {args.tolerance:.0%})")
        return EXIT_OK
    raise _UsageError("choose an oracle: marginal | monotonicity | divergence "
                      "| tau | degree")


def _cmd_experiment(args, argv) -> int:
    _echo(argv, None)
    spec = harness.load_experiment_config(args.config)
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    result = harness.run_experiment(spec, workers=workers,
                                    allow_large=args.allow_large,
                                    dump_edges_dir=args.dump_edges)
    harness.export_csv(result, args.out, raw_path=args.raw_out)
    print(f"model: {spec.model}  sizes: {list(spec.sizes)}  "
          f"seeds: {list(spec.seeds)}")
    print(f"rows: {len(result.rows)}  routes: {len(result.raw)}")
    print(f"wrote: {args.out}")
    if args.raw_out:
        print(f"wrote: {args.raw_out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_model_args(p: _Parser) -> None:
    p.add_argument("--model", required=True, choices=harness.MODELS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $NAVGRAPH_SEED or 0)")
    p.add_argument("--identity-pi", action="store_true",
                   help="use the identity permutation")
    p.add_argument("--pi-file", help="whitespace-separated permutation file")
    p.add_argument("--branching", type=int, default=None)
    p.add_argument("--grid-dims", help="comma-separated grid side lengths")
    p.add_argument("--toric", action="store_true")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--links", type=int, default=None)
    p.add_argument("--space-kind", choices=("directed-cycle", "undirected-cycle",
                                            "grid", "tree"),
                   help="base space for the baseline models")


def build_parser() -> _Parser:
    parser = _Parser(prog="navgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_gen = sub.add_parser("generate", help="build a graph and write its edge list")
    _add_model_args(p_gen)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--thin", action="store_true",
                       help="keep non-base edges with probability 1/ln(n)")

    p_route = sub.add_parser("route", help="route one query and print the outcome")
    _add_model_args(p_route)
    p_route.add_argument("--edges", help="edge-list file overriding the built graph")
    p_route.add_argument("--source", type=int, required=True)
    p_route.add_argument("--target", type=int, required=True)
    p_route.add_argument("--mode", default="greedy-1", choices=_MODE_CHOICES)
    p_route.add_argument("--plateau", choices=("auto", "on", "off"), default="auto")
    p_route.add_argument("--max-steps", type=int, default=None)

    p_oracle = sub.add_parser("oracle", help="run an exact or Monte Carlo verifier")
    osub = p_oracle.add_subparsers(dest="oracle_cmd", parser_class=_Parser)
    o_marg = osub.add_parser("marginal")
    o_marg.add_argument("--n", type=int, default=6)
    o_marg.add_argument("--csv")
    o_mono = osub.add_parser("monotonicity")
    o_mono.add_argument("--n", type=int, default=7)
    o_mono.add_argument("--csv")
    o_div = osub.add_parser("divergence")
    o_div.add_argument("--n-max", type=int, default=8)
    o_div.add_argument("--csv")
    o_tau = osub.add_parser("tau")
    o_tau.add_argument("--n", type=int, default=1000)
    o_tau.add_argument("--set-size", type=int, default=100)
    o_tau.add_argument("--samples", type=int, default=10000)
    o_tau.add_argument("--seed", type=int, default=None)
    o_tau.add_argument("--csv")
    o_deg = osub.add_parser("degree")
    o_deg.add_argument("--n", type=int, default=1024)
    o_deg.add_argument("--seeds", type=int, default=20)
    o_deg.add_argument("--tolerance", type=float, default=0.05)
    o_deg.add_argument("--seed", type=int, default=None)
    o_deg.add_argument("--csv")

    p_exp = sub.add_parser("experiment", help="run a config-driven study to CSV")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--raw-out")
    p_exp.add_argument("--workers", type=int, default=0,
                       help="parallel trials (default: all cores)")
    p_exp.add_argument("--allow-large", action="store_true",
                       help="raise the size ceiling to 2^16")
    p_exp.add_argument("--dump-edges", help="directory for per-trial edge lists")
    return parser


_COMMANDS = {
    "generate": _cmd_generate,
    "route": _cmd_route,
    "oracle": _cmd_oracle,
    "experiment": _cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return _COMMANDS[args.command](args, argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
