"""Brute-force verifiers for the exact small-instance laws.

These run the production builders and routers over exhaustively enumerated
permutations (or seeded Monte Carlo samples) and compare the outcome
against independently stated expectations, using exact integer/rational
arithmetic wherever the claim is exact.  They are cheap enough to run
before trusting any large-scale simulation.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .construction import Assignment, NavGraph, Seed, build_double_clustering
from .routing import RoutingMode, route
from .spaces import DirectedCycle

__all__ = [
    "MarginalLawReport",
    "MonotonicityReport",
    "DivergenceWitness",
    "TauTailReport",
    "DegreeStats",
    "marginal_edge_law",
    "monotonicity_check",
    "find_divergent_permutation",
    "tau_tail",
    "random_disjoint_sets",
    "degree_statistics",
]

_MAX_MARGINAL_N = 8
_MAX_MONOTONE_N = 7
_MAX_DIVERGENCE_N = 9


def _write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# exact marginal edge law on the double cycle


@dataclass(frozen=True)
class MarginalLawRow:
    head: int
    distance: int
    count: int
    total: int
    probability: Fraction
    expected: Fraction

    @property
    def exact(self) -> bool:
        return self.probability == self.expected


@dataclass
class MarginalLawReport:
    n: int
    rows: list[MarginalLawRow]

    @property
    def all_exact(self) -> bool:
        return all(row.exact for row in self.rows)

    def table(self) -> str:
        lines = [f"double cycle n={self.n}: edge frequency of 0 ~> y over "
                 f"{self.rows[0].total} permutation classes",
                 f"{'y':>3} {'d':>3} {'count':>8} {'empirical':>12} "
                 f"{'expected':>10} ok"]
        for r in self.rows:
            lines.append(f"{r.head:>3} {r.distance:>3} {r.count:>8} "
                         f"{str(r.probability):>12} {str(r.expected):>10} "
                         f"{'yes' if r.exact else 'NO'}")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, ["head", "distance", "count", "total",
                          "probability", "expected", "exact"],
                   [[r.head, r.distance, r.count, r.total,
                     str(r.probability), str(r.expected), int(r.exact)]
                    for r in self.rows])


def marginal_edge_law(n: int) -> MarginalLawReport:
    """Exhaustively count how often 0 links to each y on the double cycle.

    The edge set is invariant under rotating all permuted positions, so
    enumeration fixes pi(0) = 0 and covers (n-1)! rotation classes; the
    returned frequencies are exact rationals that must equal 1/d(0, y).
    """
    if not 2 <= n <= _MAX_MARGINAL_N:
        raise ValueError(
            f"exhaustive enumeration supports 2 <= n <= {_MAX_MARGINAL_N}, got {n}")
    space = DirectedCycle(n)
    total = math.factorial(n - 1)
    counts = [0] * n
    pi = np.zeros(n, dtype=np.int64)
    for tail in itertools.permutations(range(1, n)):
        pi[1:] = tail
        graph = build_double_clustering(Assignment(space, space, pi))
        for head in graph.out_edges[0]:
            counts[head] += 1
    rows = [MarginalLawRow(head=y, distance=y, count=counts[y], total=total,
                           probability=Fraction(counts[y], total),
                           expected=Fraction(1, y))
            for y in range(1, n)]
    return MarginalLawReport(n, rows)


# ---------------------------------------------------------------------------
# path monotonicity in both distances


@dataclass(frozen=True)
class MonotonicityViolation:
    pi: tuple[int, ...]
    source: int
    target: int
    routed_space: int
    path: tuple[int, ...]


@dataclass
class MonotonicityReport:
    n: int
    permutations: int
    paths_checked: int
    violations: int
    examples: list[MonotonicityViolation]

    def table(self) -> str:
        head = (f"double cycle n={self.n}: {self.paths_checked} greedy paths over "
                f"{self.permutations} permutations -> {self.violations} "
                "monotonicity violations")
        lines = [head]
        for ex in self.examples[:10]:
            lines.append(f"  pi={ex.pi} {ex.source}->{ex.target} "
                         f"space={ex.routed_space} path={list(ex.path)}")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, ["n", "permutations", "paths_checked", "violations"],
                   [[self.n, self.permutations, self.paths_checked,
                     self.violations]])


def _is_strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def monotonicity_check(n: int) -> MonotonicityReport:
    """Walk every greedy path of every permutation of the double cycle and
    count violations of strict descent in the *other* cycle's distance
    (full enumeration over all n! permutations)."""
    if not 2 <= n <= _MAX_MONOTONE_N:
        raise ValueError(
            f"exhaustive enumeration supports 2 <= n <= {_MAX_MONOTONE_N}, got {n}")
    space = DirectedCycle(n)
    mode1 = RoutingMode("greedy", space=1)
    mode2 = RoutingMode("greedy", space=2)
    perms = paths = violations = 0
    examples: list[MonotonicityViolation] = []
    for pi_tuple in itertools.permutations(range(n)):
        perms += 1
        a = Assignment(space, space, np.array(pi_tuple, dtype=np.int64))
        graph = build_double_clustering(a)
        for source in range(n):
            for target in range(n):
                if source == target:
                    continue
                for mode, other_d in ((mode1, a.d2), (mode2, a.d1)):
                    outcome = route(graph, a, mode, source, target)
                    paths += 1
                    trace = [other_d(v, target) for v in outcome.path]
                    if not (outcome.success and _is_strictly_decreasing(trace)):
                        violations += 1
                        if len(examples) < 100:
                            examples.append(MonotonicityViolation(
                                pi_tuple, source, target, mode.space,
                                tuple(outcome.path)))
    return MonotonicityReport(n, perms, paths, violations, examples)


# ---------------------------------------------------------------------------
# divergence of the two greedy paths


@dataclass(frozen=True)
class DivergenceWitness:
    n: int
    pi: tuple[int, ...]
    source: int
    target: int
    path_d: tuple[int, ...]
    path_dpi: tuple[int, ...]

    def table(self) -> str:
        return (f"n={self.n} pi={list(self.pi)} route {self.source}->{self.target}\n"
                f"  greedy-1 path: {list(self.path_d)}\n"
                f"  greedy-2 path: {list(self.path_dpi)}")

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, ["n", "pi", "source", "target", "path_d", "path_dpi"],
                   [[self.n, " ".join(map(str, self.pi)), self.source,
                     self.target, " ".join(map(str, self.path_d)),
                     " ".join(map(str, self.path_dpi))]])


def find_divergent_permutation(n_max: int) -> DivergenceWitness | None:
    """First (n, pi, source, target) where greedy paths under the two
    distances differ, scanning n upward and permutations lexicographically.

    A witness exists once two intermediate vertices can sit between source
    and target in both cycles with their order swapped, which first happens
    at small n; at n = 3 there is provably none.
    """
    if n_max > _MAX_DIVERGENCE_N:
        raise ValueError(f"exhaustive search supports n_max <= {_MAX_DIVERGENCE_N}")
    mode1 = RoutingMode("greedy", space=1)
    mode2 = RoutingMode("greedy", space=2)
    for n in range(2, n_max + 1):
        space = DirectedCycle(n)
        for pi_tuple in itertools.permutations(range(n)):
            a = Assignment(space, space, np.array(pi_tuple, dtype=np.int64))
            graph = build_double_clustering(a)
            for source in range(n):
                for target in range(n):
                    if source == target:
                        continue
                    p1 = route(graph, a, mode1, source, target).path
                    p2 = route(graph, a, mode2, source, target).path
                    if p1 != p2:
                        return DivergenceWitness(n, pi_tuple, source, target,
                                                 tuple(p1), tuple(p2))
    return None


# ---------------------------------------------------------------------------
# tail of the first-escape statistic over random circular permutations


@dataclass
class TauTailReport:
    n: int
    k: int
    q: float
    samples: int
    tail: list[float]       # tail[t-1] = P(tau >= t), t = 1..k
    tau1_probability: float
    p_lower: float          # q/(1+q) minus 3 binomial sigma
    sigma: float

    @property
    def tau1_ok(self) -> bool:
        return self.tau1_probability >= self.p_lower

    @property
    def tail_nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.tail, self.tail[1:]))

    @property
    def passed(self) -> bool:
        return self.tau1_ok and self.tail_nonincreasing

    def table(self) -> str:
        lines = [f"tau tail: n={self.n} |A|={self.k} q={self.q:g} "
                 f"samples={self.samples}",
                 f"P(tau=1) = {self.tau1_probability:.4f} "
                 f"(needs >= {self.p_lower:.4f}): "
                 f"{'ok' if self.tau1_ok else 'VIOLATED'}",
                 f"tail nonincreasing: "
                 f"{'ok' if self.tail_nonincreasing else 'VIOLATED'}",
                 "t  P(tau >= t)"]
        for t, p in enumerate(self.tail[:12], start=1):
            lines.append(f"{t:<2} {p:.5f}")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, ["t", "tail_probability"],
                   [[t, repr(p)] for t, p in enumerate(self.tail, start=1)])


def random_disjoint_sets(n: int, size_a: int, size_b: int,
                         seed: Seed) -> tuple[list[int], list[int]]:
    """Disjoint vertex samples drawn from the seed's "sets" stream."""
    if size_a + size_b > n:
        raise ValueError("set sizes exceed the universe")
    chosen = seed.rng("sets").choice(n, size=size_a + size_b, replace=False)
    return [int(v) for v in chosen[:size_a]], [int(v) for v in chosen[size_a:]]


def tau_tail(n: int, a_order, b_set, samples: int, seed: Seed) -> TauTailReport:
    """Empirical tail of tau over uniform random circular permutations.

    tau is the first index t (in the supplied enumeration a_1..a_k) whose
    permuted position is at least as close to B as to the rest of A, or k
    if that never happens.  Distances are wrap-around on a cycle of n
    positions.
    """
    a_idx = [int(v) for v in a_order]
    b_idx = [int(v) for v in b_set]
    if set(a_idx) & set(b_idx):
        raise ValueError("A and B must be disjoint")
    if not a_idx or not b_idx:
        raise ValueError("A and B must be nonempty")
    if len(set(a_idx)) != len(a_idx) or len(set(b_idx)) != len(b_idx):
        raise ValueError("A and B must not contain duplicates")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    k = len(a_idx)
    q = len(b_idx) / k
    rng = seed.rng("tau")
    a_arr = np.array(a_idx)
    b_arr = np.array(b_idx)

    def circ(delta: np.ndarray) -> np.ndarray:
        d = np.abs(delta)
        return np.minimum(d, n - d)

    tau_counts = np.zeros(k + 1, dtype=np.int64)
    for _ in range(samples):
        perm = rng.permutation(n)
        pos_a = perm[a_arr]
        pos_b = perm[b_arr]
        if k > 1:
            d_aa = circ(pos_a[:, None] - pos_a[None, :]).astype(np.float64)
            np.fill_diagonal(d_aa, np.inf)
            min_a = d_aa.min(axis=1)
        else:
            min_a = np.array([np.inf])
        min_b = circ(pos_a[:, None] - pos_b[None, :]).min(axis=1)
        hits = np.flatnonzero(min_a >= min_b)
        tau = int(hits[0]) + 1 if hits.size else k
        tau_counts[tau] += 1
    # tail[t-1] = P(tau >= t) = 1 - cumulative frequency below t
    tail = [float(p) for p in (samples - np.cumsum(tau_counts)[:-1]) / samples]
    p = q / (1 + q)
    sigma = math.sqrt(p * (1 - p) / samples)
    return TauTailReport(n=n, k=k, q=q, samples=samples, tail=tail,
                         tau1_probability=1.0 - tail[1] if k > 1 else 1.0,
                         p_lower=p - 3 * sigma, sigma=sigma)


# ---------------------------------------------------------------------------
# degree statistics


@dataclass
class DegreeStats:
    mean: float
    maximum: int
    histogram: dict[int, int]

    def table(self) -> str:
        lines = [f"mean out-degree {self.mean:.4f}, max {self.maximum}",
                 "degree count"]
        for deg in sorted(self.histogram):
            lines.append(f"{deg:>6} {self.histogram[deg]}")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, ["degree", "count"],
                   [[deg, self.histogram[deg]] for deg in sorted(self.histogram)])


def degree_statistics(graph: NavGraph) -> DegreeStats:
    degrees = [len(heads) for heads in graph.out_edges]
    hist: dict[int, int] = {}
    for d in degrees:
        hist[d] = hist.get(d, 0) + 1
    return DegreeStats(mean=sum(degrees) / len(degrees),
                       maximum=max(degrees), histogram=hist)
