"""Declarative, seeded experiment runner.

An :class:`ExperimentSpec` names a graph model, a list of sizes and master
seeds, and a list of routing modes.  For every (size, seed) the harness
samples positions/permutation from dedicated seed streams, builds the
graph once, routes a fixed number of uniformly sampled (source != target)
pairs under every mode, and aggregates per (size, seed, mode).

Identical spec + seeds reproduce identical CSV bytes (the wall_ms column
excluded); trials are independent, so results do not depend on worker
scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .construction import (Assignment, NavGraph, Seed, build_double_clustering,
                           build_independent_interest, build_kleinberg,
                           thin_edges, write_edge_list)
from .routing import RoutingMode, route
from .spaces import (DirectedCycle, Euclidean, Grid, Space, TreeLeaves,
                     UndirectedCycle)

__all__ = [
    "MODELS",
    "DEFAULT_MAX_SIZE",
    "LARGE_MAX_SIZE",
    "ExperimentSpec",
    "AggregateRow",
    "RouteRecord",
    "ExperimentResult",
    "ScalingFit",
    "run_experiment",
    "fit_scaling",
    "export_csv",
    "read_aggregate_csv",
    "csv_without_wall_ms",
    "load_experiment_config",
    "experiment_spec_from_dict",
    "build_space",
    "build_model",
    "AGGREGATE_HEADER",
    "RAW_HEADER",
]

MODELS = ("two-directed-cycles", "two-undirected-cycles", "grid-tree",
          "continuum", "independent-interest", "kleinberg")

DEFAULT_MAX_SIZE = 2**14   # construction costs O(n^2) distance evaluations
LARGE_MAX_SIZE = 2**16

AGGREGATE_HEADER = ("model,n,seed,mode,routes,successes,success_rate,"
                    "mean_len,median_len,mean_outdeg,wall_ms")
RAW_HEADER = "n,seed,mode,source,target,steps,success,failure"


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one study.

    ``params`` carries the model-specific knobs: ``branching`` (grid-tree),
    ``alpha``/``links`` (kleinberg), ``space`` descriptor (baselines),
    ``box1``/``box2`` extents (continuum), ``grid_dims``, ``toric``.
    """

    model: str
    sizes: tuple[int, ...]
    seeds: tuple[int, ...]
    routes_per_size: int = 1000
    routing_modes: tuple[RoutingMode, ...] = (RoutingMode("greedy", space=1),)
    thinning: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "routing_modes", tuple(self.routing_modes))
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not self.sizes or list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be nonempty and strictly ascending")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.routes_per_size < 1:
            raise ValueError("routes_per_size must be >= 1")
        if not self.routing_modes:
            raise ValueError("routing_modes must be nonempty")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "sizes": list(self.sizes),
            "seeds": list(self.seeds),
            "routes_per_size": self.routes_per_size,
            "routing_modes": [m.label for m in self.routing_modes],
            "thinning": self.thinning,
            "params": dict(self.params),
        }


def experiment_spec_from_dict(data: dict) -> ExperimentSpec:
    known = {"model", "sizes", "seeds", "routes_per_size", "routing_modes",
             "thinning", "params"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    modes = tuple(RoutingMode.parse(m) for m in data.get("routing_modes", ["greedy-1"]))
    return ExperimentSpec(
        model=data["model"],
        sizes=tuple(data["sizes"]),
        seeds=tuple(data["seeds"]),
        routes_per_size=int(data.get("routes_per_size", 1000)),
        routing_modes=modes,
        thinning=bool(data.get("thinning", False)),
        params=dict(data.get("params", {})),
    )


def load_experiment_config(path: str | Path) -> ExperimentSpec:
    """Read an experiment spec from a JSON config file (keys mirror
    :class:`ExperimentSpec`; see README for the documented key set)."""
    return experiment_spec_from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AggregateRow:
    model: str
    n: int
    seed: int
    mode: str
    routes: int
    successes: int
    success_rate: float
    mean_len: float | None
    median_len: float | None
    mean_outdeg: float
    wall_ms: float


@dataclass(frozen=True)
class RouteRecord:
    n: int
    seed: int
    mode: str
    source: int
    target: int
    steps: int
    success: bool
    failure: str


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[AggregateRow]
    raw: list[RouteRecord]

    def rows_for(self, mode: str | None = None, n: int | None = None) -> list[AggregateRow]:
        return [r for r in self.rows
                if (mode is None or r.mode == mode) and (n is None or r.n == n)]


# ---------------------------------------------------------------------------
# model instantiation


def _near_square_dims(n: int) -> tuple[int, int]:
    best = 1
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            best = d
    return (n // best, best)


def build_space(descriptor: dict, n: int) -> Space:
    """Instantiate a space descriptor at size n.

    Descriptor keys: kind (directed-cycle | undirected-cycle | grid | tree),
    plus dims/toric for grids and branching for trees.  Grid dims default
    to the most square factorization of n; tree height is derived from n.
    """
    kind = descriptor.get("kind", "undirected-cycle")
    if kind == "directed-cycle":
        return DirectedCycle(n)
    if kind == "undirected-cycle":
        return UndirectedCycle(n)
    if kind == "grid":
        dims = tuple(descriptor.get("dims") or _near_square_dims(n))
        if math.prod(dims) != n:
            raise ValueError(f"grid dims {dims} do not multiply to n={n}")
        return Grid(dims, toric=bool(descriptor.get("toric", False)))
    if kind in ("tree", "tree-leaves"):
        branching = int(descriptor.get("branching", 2))
        height = round(math.log(n, branching))
        if branching**height != n:
            raise ValueError(f"n={n} is not a power of branching={branching}")
        return TreeLeaves(branching, height)
    raise ValueError(f"unknown space kind {kind!r}")


def build_model(model: str, params: dict, n: int, seed: Seed,
                pi: np.ndarray | None = None) -> tuple[Assignment, NavGraph]:
    """Instantiate the model's spaces at size n and build its graph.

    ``pi`` overrides the permutation stream of the double-clustering
    models (used to replay explicit permutations); the baseline models
    have no permutation to override.
    """
    def paired(space1: Space, space2: Space) -> Assignment:
        if pi is not None:
            return Assignment(space1, space2, pi)
        return Assignment.random(space1, space2, seed)

    if model in ("independent-interest", "kleinberg", "continuum") and pi is not None:
        raise ValueError(f"model {model!r} takes no explicit permutation")
    if model == "two-directed-cycles":
        assignment = paired(DirectedCycle(n), DirectedCycle(n))
        graph = build_double_clustering(assignment)
    elif model == "two-undirected-cycles":
        assignment = paired(UndirectedCycle(n), UndirectedCycle(n))
        graph = build_double_clustering(assignment)
    elif model == "grid-tree":
        grid = build_space({"kind": "grid", "dims": params.get("grid_dims"),
                            "toric": params.get("toric", False)}, n)
        tree = build_space({"kind": "tree",
                            "branching": params.get("branching", 2)}, n)
        assignment = paired(grid, tree)
        graph = build_double_clustering(assignment)
    elif model == "continuum":
        box1 = tuple(params.get("box1", (1.33, 1.0)))
        box2 = tuple(params.get("box2", (1.0, 1.0, 1.0)))
        pts1 = seed.rng("points", 1).random((n, len(box1))) * np.asarray(box1)
        pts2 = seed.rng("points", 2).random((n, len(box2))) * np.asarray(box2)
        assignment = Assignment.identity(Euclidean(pts1, box1),
                                         Euclidean(pts2, box2))
        graph = build_double_clustering(assignment)
    elif model == "independent-interest":
        space = build_space(params.get("space", {"kind": "undirected-cycle"}), n)
        assignment = Assignment.identity(space)
        graph = build_independent_interest(space, seed)
    elif model == "kleinberg":
        space = build_space(params.get("space", {"kind": "grid"}), n)
        assignment = Assignment.identity(space)
        graph = build_kleinberg(space, float(params.get("alpha", 0.0)),
                                int(params.get("links", 1)), seed)
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return assignment, graph


def _build_trial(spec: ExperimentSpec, n: int, seed: Seed) -> tuple[Assignment, NavGraph]:
    assignment, graph = build_model(spec.model, spec.params, n, seed)
    if spec.thinning:
        graph = thin_edges(graph, assignment.space1, seed)
    return assignment, graph


def _sample_route_pairs(n: int, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    count = min(count, n * (n - 1))
    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    while len(pairs) < count:
        s = int(rng.integers(n))
        t = int(rng.integers(n))
        if s == t or (s, t) in seen:
            continue
        seen.add((s, t))
        pairs.append((s, t))
    return pairs


def _run_trial(spec: ExperimentSpec, n: int, master: int,
               dump_edges_dir: str | None = None) -> tuple[list[AggregateRow], list[RouteRecord]]:
    seed = Seed(master)
    t0 = time.perf_counter()
    assignment, graph = _build_trial(spec, n, seed)
    build_ms = (time.perf_counter() - t0) * 1000.0
    if dump_edges_dir is not None:
        out = Path(dump_edges_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_edge_list(graph, out / f"{spec.model}-n{n}-seed{master}.edges")
    pairs = _sample_route_pairs(n, spec.routes_per_size, seed.rng("routes"))
    mean_outdeg = graph.mean_out_degree()
    rows: list[AggregateRow] = []
    raw: list[RouteRecord] = []
    for mode in spec.routing_modes:
        t1 = time.perf_counter()
        lengths: list[int] = []
        successes = 0
        for source, target in pairs:
            outcome = route(graph, assignment, mode, source, target)
            if outcome.success:
                successes += 1
                lengths.append(outcome.steps)
            raw.append(RouteRecord(n, master, mode.label, source, target,
                                   outcome.steps, outcome.success,
                                   outcome.failure.value))
        mode_ms = (time.perf_counter() - t1) * 1000.0
        rows.append(AggregateRow(
            model=spec.model, n=n, seed=master, mode=mode.label,
            routes=len(pairs), successes=successes,
            success_rate=successes / len(pairs),
            mean_len=(sum(lengths) / len(lengths)) if lengths else None,
            median_len=float(statistics.median(lengths)) if lengths else None,
            mean_outdeg=mean_outdeg, wall_ms=build_ms + mode_ms))
    return rows, raw


def _validate_budget(spec: ExperimentSpec, allow_large: bool) -> None:
    limit = LARGE_MAX_SIZE if allow_large else DEFAULT_MAX_SIZE
    too_big = [n for n in spec.sizes if n > limit]
    if not too_big:
        return
    if allow_large:
        raise ValueError(f"sizes {too_big} exceed the hard n <= {limit} ceiling")
    raise ValueError(
        f"sizes {too_big} exceed the n <= {limit} budget (construction scans "
        f"O(n^2) distances); pass allow_large to raise the ceiling to "
        f"{LARGE_MAX_SIZE}")


def run_experiment(spec: ExperimentSpec, *, workers: int = 1,
                   allow_large: bool = False,
                   dump_edges_dir: str | None = None) -> ExperimentResult:
    """Run every (size, seed) trial of the spec and aggregate.

    Failed routes are excluded from length means but counted in the
    success rate.  Trials are independent; with workers > 1 they fan out
    across processes and are reduced in (size, seed) order, so the result
    is identical for any worker count.
    """
    _validate_budget(spec, allow_large)
    tasks = [(n, master) for n in spec.sizes for master in spec.seeds]
    rows: list[AggregateRow] = []
    raw: list[RouteRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_run_trial, [spec] * len(tasks),
                               [n for n, _ in tasks], [m for _, m in tasks],
                               [dump_edges_dir] * len(tasks))
            for trial_rows, trial_raw in results:
                rows.extend(trial_rows)
                raw.extend(trial_raw)
    else:
        for n, master in tasks:
            trial_rows, trial_raw = _run_trial(spec, n, master, dump_edges_dir)
            rows.extend(trial_rows)
            raw.extend(trial_raw)
    return ExperimentResult(spec, rows, raw)


# ---------------------------------------------------------------------------
# scaling fit


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float


def fit_scaling(result: ExperimentResult) -> dict[str, ScalingFit]:
    """Per-mode OLS of mean path length against log2(n), pooled over seeds."""
    sizes = {r.n for r in result.rows}
    if len(sizes) < 3:
        raise ValueError(f"scaling fit needs >= 3 sizes, got {len(sizes)}")
    fits: dict[str, ScalingFit] = {}
    for mode in [m.label for m in result.spec.routing_modes]:
        points = [(math.log2(r.n), r.mean_len) for r in result.rows
                  if r.mode == mode and r.mean_len is not None]
        if len({x for x, _ in points}) < 3:
            raise ValueError(f"scaling fit for {mode} needs >= 3 sizes with successes")
        x = np.array([p[0] for p in points])
        y = np.array([p[1] for p in points])
        xc = x - x.mean()
        slope = float((xc * (y - y.mean())).sum() / (xc * xc).sum())
        intercept = float(y.mean() - slope * x.mean())
        residuals = y - (slope * x + intercept)
        ss_res = float((residuals**2).sum())
        ss_tot = float(((y - y.mean())**2).sum())
        if ss_tot == 0.0:
            r2 = 1.0 if ss_res == 0.0 else 0.0
        else:
            r2 = 1.0 - ss_res / ss_tot
        fits[mode] = ScalingFit(slope, intercept, r2)
    return fits


# ---------------------------------------------------------------------------
# CSV export / import


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def aggregate_csv_text(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(AGGREGATE_HEADER + "\n")
    for r in result.rows:
        buf.write(",".join(_fmt(v) for v in (
            r.model, r.n, r.seed, r.mode, r.routes, r.successes,
            r.success_rate, r.mean_len, r.median_len, r.mean_outdeg,
            r.wall_ms)) + "\n")
    return buf.getvalue()


def raw_csv_text(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(RAW_HEADER + "\n")
    for r in result.raw:
        buf.write(",".join(_fmt(v) for v in (
            r.n, r.seed, r.mode, r.source, r.target, r.steps, r.success,
            r.failure)) + "\n")
    return buf.getvalue()


def export_csv(result: ExperimentResult, path: str | Path,
               raw_path: str | Path | None = None) -> None:
    """Aggregate CSV (one row per size/seed/mode); optional raw per-route CSV."""
    Path(path).write_text(aggregate_csv_text(result))
    if raw_path is not None:
        Path(raw_path).write_text(raw_csv_text(result))


def read_aggregate_csv(path: str | Path) -> list[AggregateRow]:
    rows: list[AggregateRow] = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(AggregateRow(
                model=rec["model"], n=int(rec["n"]), seed=int(rec["seed"]),
                mode=rec["mode"], routes=int(rec["routes"]),
                successes=int(rec["successes"]),
                success_rate=float(rec["success_rate"]),
                mean_len=float(rec["mean_len"]) if rec["mean_len"] else None,
                median_len=float(rec["median_len"]) if rec["median_len"] else None,
                mean_outdeg=float(rec["mean_outdeg"]),
                wall_ms=float(rec["wall_ms"])))
    return rows


def csv_without_wall_ms(text: str) -> str:
    """Drop the trailing wall_ms column (the only nondeterministic one)."""
    return "\n".join(line.rsplit(",", 1)[0] for line in text.splitlines()) + "\n"
