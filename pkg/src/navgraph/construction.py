"""Directed graph builders over paired metric spaces.

The central rule links a vertex to every candidate that is at least as
close in the second space as all candidates strictly closer in the first
space.  Ties in the first space form one unordered shell: members of a
shell never constrain each other, and the running second-space minimum is
updated only after the whole shell has been scanned.

All builders are pure functions of their parameters and a :class:`Seed`;
randomness is drawn from per-vertex streams derived from (master seed,
stream label, vertex id), so edge sets do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spaces import Space

__all__ = [
    "Seed",
    "Assignment",
    "Provenance",
    "NavGraph",
    "build_double_clustering",
    "build_independent_interest",
    "build_kleinberg",
    "long_range_distribution",
    "thin_edges",
    "edge_keep_probability",
    "parse_permutation",
    "load_permutation",
    "write_edge_list",
    "read_edge_list",
    "write_dot",
]

_MASK64 = (1 << 64) - 1

# below this size the pure-Python builder path beats numpy call overhead
_NUMPY_BUILD_THRESHOLD = 256


@dataclass(frozen=True)
class Seed:
    """Master seed plus derived, labelled generator streams.

    Identical (master, labels) always yield the same generator, so any
    computation keyed on per-vertex streams is reproducible regardless of
    scheduling.
    """

    master: int

    def rng(self, *labels: int | str) -> np.random.Generator:
        entropy: list[int] = [self.master & _MASK64]
        for label in labels:
            if isinstance(label, str):
                entropy.append(int.from_bytes(label.encode("utf-8"), "little"))
            else:
                entropy.append(int(label) & _MASK64)
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def permutation(self, n: int) -> np.ndarray:
        """The permutation stream used by all double-clustering models."""
        return self.rng("pi").permutation(n)


@dataclass(frozen=True, eq=False)
class Assignment:
    """Pairing of each vertex with a position in two spaces.

    Vertex ``v`` sits at position ``v`` in ``space1`` and position
    ``pi[v]`` in ``space2``; ``pi`` must be a bijection on [0, n).
    """

    space1: Space
    space2: Space
    pi: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.int64).copy()
        n = self.space1.n
        if self.space2.n != n:
            raise ValueError(
                f"space sizes differ: {n} vs {self.space2.n}")
        if pi.shape != (n,) or not np.array_equal(np.sort(pi), np.arange(n)):
            raise ValueError("pi must be a permutation of 0..n-1")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        inv = np.empty(n, dtype=np.int64)
        inv[pi] = np.arange(n)
        inv.setflags(write=False)
        object.__setattr__(self, "_pi_inv", inv)

    @property
    def n(self) -> int:
        return self.space1.n

    @property
    def pi_inverse(self) -> np.ndarray:
        return self._pi_inv  # type: ignore[attr-defined]

    def d1(self, x: int, y: int):
        return self.space1.distance(x, y)

    def d2(self, x: int, y: int):
        """Second-space distance between the positions of vertices x, y."""
        return self.space2.distance(int(self.pi[x]), int(self.pi[y]))

    def base_neighbors2(self, x: int) -> list[int]:
        """Vertices whose space-2 position neighbors x's space-2 position."""
        inv = self.pi_inverse
        return sorted(int(inv[p]) for p in self.space2.base_neighbors(int(self.pi[x])))

    def swapped(self) -> "Assignment":
        """Role-swapped assignment (space2 primary, inverse permutation)."""
        return Assignment(self.space2, self.space1, self.pi_inverse)

    @classmethod
    def identity(cls, space1: Space, space2: Space | None = None) -> "Assignment":
        return cls(space1, space2 or space1, np.arange(space1.n))

    @classmethod
    def random(cls, space1: Space, space2: Space, seed: Seed) -> "Assignment":
        return cls(space1, space2, seed.permutation(space1.n))


@dataclass(frozen=True)
class Provenance:
    """How a NavGraph was produced."""

    kind: str
    alpha: float | None = None
    links: int | None = None
    of: "Provenance | None" = None

    @property
    def label(self) -> str:
        if self.kind == "kleinberg":
            return f"kleinberg(alpha={self.alpha:g},links={self.links})"
        if self.kind == "thinned":
            inner = self.of.label if self.of else "?"
            return f"thinned({inner})"
        return self.kind


@dataclass(eq=False)
class NavGraph:
    """Directed adjacency: per-vertex sorted lists of head ids."""

    n: int
    out_edges: list[list[int]]
    provenance: Provenance = field(default_factory=lambda: Provenance("unknown"))

    def edge_count(self) -> int:
        return sum(len(heads) for heads in self.out_edges)

    def mean_out_degree(self) -> float:
        return self.edge_count() / self.n if self.n else 0.0

    def iter_edges(self):
        for tail, heads in enumerate(self.out_edges):
            for head in heads:
                yield tail, head

    def undirected_view(self) -> "NavGraph":
        """Union with reversed edges; read-only adapter for degree stats."""
        sym: list[set[int]] = [set(h) for h in self.out_edges]
        for tail, head in self.iter_edges():
            sym[head].add(tail)
        return NavGraph(self.n, [sorted(s) for s in sym], self.provenance)


# ---------------------------------------------------------------------------
# record-selection core shared by the clustering and interest builders


def _record_select_mask(sorted_key: np.ndarray, sorted_val: np.ndarray) -> np.ndarray:
    """Mask entries whose value is <= the running minimum over all
    strictly-earlier key groups (first group passes vacuously)."""
    m = sorted_key.shape[0]
    if m == 0:
        return np.zeros(0, dtype=bool)
    change = np.empty(m, dtype=bool)
    change[0] = True
    np.not_equal(sorted_key[1:], sorted_key[:-1], out=change[1:])
    starts = np.flatnonzero(change)
    shell_of = np.cumsum(change) - 1
    cummin = np.minimum.accumulate(sorted_val)
    prev_last = starts[shell_of] - 1
    before = np.where(prev_last >= 0, cummin[np.maximum(prev_last, 0)], np.inf)
    return sorted_val <= before


def _candidate_order(space1: Space, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidates j != i sorted by d1(i, j), plus the sorted distances."""
    analytic = space1.shell_order_from(i)
    if analytic is not None:
        return analytic
    d1 = space1.distances_from(i)
    order = np.argsort(d1, kind="stable")
    order = order[order != i]
    return order, d1[order]


def _select_rows_numpy(space1: Space, value_row, n: int) -> list[list[int]]:
    out: list[list[int]] = []
    for i in range(n):
        order, sorted_d1 = _candidate_order(space1, i)
        vals = value_row(i)[order].astype(np.float64, copy=False)
        mask = _record_select_mask(sorted_d1, vals)
        heads = np.sort(order[mask])
        out.append([int(h) for h in heads])
    return out


def _select_row_python(pairs: list[tuple[float, int, float]]) -> list[int]:
    """pairs: (d1, candidate, value) for all candidates of one source."""
    pairs.sort(key=lambda t: t[0])
    best = math.inf
    heads: list[int] = []
    idx = 0
    m = len(pairs)
    while idx < m:
        shell_d = pairs[idx][0]
        shell_best = math.inf
        j = idx
        while j < m and pairs[j][0] == shell_d:
            _, cand, val = pairs[j]
            if val <= best:
                heads.append(cand)
            if val < shell_best:
                shell_best = val
            j += 1
        if shell_best < best:
            best = shell_best
        idx = j
    heads.sort()
    return heads


# ---------------------------------------------------------------------------
# builders


def build_double_clustering(assignment: Assignment) -> NavGraph:
    """Link i -> j iff j is at least as close in space 2 as every vertex
    strictly closer than j in space 1 (vacuously true for the nearest
    shell, so the base adjacency of both spaces is always contained).
    """
    n = assignment.n
    if n >= _NUMPY_BUILD_THRESHOLD:
        pi = assignment.pi
        space2 = assignment.space2

        def value_row(i: int) -> np.ndarray:
            return space2.distances_from(int(pi[i]))[pi]

        out = _select_rows_numpy(assignment.space1, value_row, n)
    else:
        out = []
        for i in range(n):
            pairs = [(assignment.d1(i, j), j, float(assignment.d2(i, j)))
                     for j in range(n) if j != i]
            out.append(_select_row_python(pairs))
    return NavGraph(n, out, Provenance("double-clustering"))


def build_independent_interest(space: Space, seed: Seed) -> NavGraph:
    """Link x -> y iff x's i.i.d. Uniform(0,1) interest in y beats its
    interest in every strictly closer vertex.

    Uniform values are the simplest exchangeable family with no ties; each
    vertex draws from its own stream ("ii", x).
    """
    n = space.n
    out: list[list[int]] = []
    if n >= _NUMPY_BUILD_THRESHOLD:
        for i in range(n):
            values = seed.rng("ii", i).random(n)
            order, sorted_d1 = _candidate_order(space, i)
            # keep iff value >= running max  <=>  -value <= running min
            mask = _record_select_mask(sorted_d1, -values[order])
            heads = np.sort(order[mask])
            out.append([int(h) for h in heads])
    else:
        for i in range(n):
            values = seed.rng("ii", i).random(n)
            pairs = [(space.distance(i, j), j, -float(values[j]))
                     for j in range(n) if j != i]
            out.append(_select_row_python(pairs))
    return NavGraph(n, out, Provenance("independent-interest"))


def long_range_distribution(space: Space, x: int, alpha: float):
    """Candidates y != x and their link probabilities ~ d(x, y)^-alpha,
    normalized by exact summation.  Returns (None, None) when n == 1.
    """
    n = space.n
    if n == 1:
        return None, None
    d = space.distances_from(x).astype(np.float64)
    cand = np.flatnonzero(np.arange(n) != x)
    weights = d[cand] ** (-alpha) if alpha != 0 else np.ones(len(cand))
    return cand, weights / weights.sum()


def build_kleinberg(space: Space, alpha: float, links: int, seed: Seed) -> NavGraph:
    """Base-graph edges plus `links` long-range heads per vertex, sampled
    independently with probability proportional to distance^-alpha.
    Duplicate draws collapse.
    """
    if not space.is_graph_kind:
        raise ValueError("lattice augmentation needs a graph-kind space")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if links < 1:
        raise ValueError("links must be >= 1")
    n = space.n
    out: list[list[int]] = []
    for x in range(n):
        heads = set(space.base_neighbors(x))
        cand, probs = long_range_distribution(space, x, alpha)
        if cand is not None:
            draws = seed.rng("kleinberg", x).choice(cand, size=links, p=probs)
            heads.update(int(y) for y in np.atleast_1d(draws))
        heads.discard(x)
        out.append(sorted(heads))
    return NavGraph(n, out, Provenance("kleinberg", alpha=float(alpha), links=links))


def edge_keep_probability(n) -> float:
    """Thinning keep probability 1/ln(n)."""
    if n <= math.e:
        raise ValueError("thinning needs n with ln(n) > 1")
    return 1.0 / math.log(n)


def thin_edges(graph: NavGraph, base_space: Space, seed: Seed) -> NavGraph:
    """Keep each non-base edge independently with probability 1/ln(n).

    Base-neighbor edges are always kept: thinning is meant to bound degree,
    and removing base edges would break greedy termination guarantees.
    """
    n = graph.n
    if n <= 2:
        raise ValueError(f"thinning needs n >= 3, got {n}")
    if base_space.n != n:
        raise ValueError("base space size does not match graph")
    keep_p = edge_keep_probability(n)
    out: list[list[int]] = []
    for x in range(n):
        base = set(base_space.base_neighbors(x))
        extras = [h for h in graph.out_edges[x] if h not in base]
        kept = set(h for h in graph.out_edges[x] if h in base)
        if extras:
            u = seed.rng("thin", x).random(len(extras))
            kept.update(h for h, uh in zip(extras, u) if uh < keep_p)
        out.append(sorted(kept))
    return NavGraph(n, out, Provenance("thinned", of=graph.provenance))


# ---------------------------------------------------------------------------
# text formats


def parse_permutation(text: str) -> np.ndarray:
    """Whitespace-separated integers -> validated permutation array."""
    values = np.array([int(tok) for tok in text.split()], dtype=np.int64)
    if not np.array_equal(np.sort(values), np.arange(len(values))):
        raise ValueError("input is not a permutation of 0..n-1")
    return values


def load_permutation(path: str | Path) -> np.ndarray:
    return parse_permutation(Path(path).read_text())


def edge_list_text(graph: NavGraph) -> str:
    lines = [f"{tail}\t{head}" for tail, head in graph.iter_edges()]
    return "\n".join(lines) + ("\n" if lines else "")


def write_edge_list(graph: NavGraph, path: str | Path) -> None:
    """One `tail<TAB>head` line per edge, sorted by (tail, head)."""
    Path(path).write_text(edge_list_text(graph))


def read_edge_list(path: str | Path, n: int | None = None) -> NavGraph:
    pairs = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        tail_s, head_s = line.split()
        pairs.append((int(tail_s), int(head_s)))
    if n is None:
        n = 1 + max((max(t, h) for t, h in pairs), default=-1)
    out: list[set[int]] = [set() for _ in range(n)]
    for tail, head in pairs:
        if not (0 <= tail < n and 0 <= head < n):
            raise ValueError(f"edge ({tail}, {head}) out of range for n={n}")
        if tail != head:
            out[tail].add(head)
    return NavGraph(n, [sorted(s) for s in out], Provenance("imported"))


def write_dot(graph: NavGraph, path: str | Path) -> None:
    """Plain DOT digraph for visualization tooling."""
    lines = ["digraph navgraph {"]
    lines += [f"  {tail} -> {head};" for tail, head in graph.iter_edges()]
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")
