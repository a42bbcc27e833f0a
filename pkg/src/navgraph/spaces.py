"""Finite metric spaces used as routing substrates.

Every space is a universe of ``n`` points addressed by integer ids
``0..n-1`` and exposes a distance kernel ``d(x, y)``.  The kernel is
nonnegative, zero exactly on the diagonal, and satisfies the triangle
inequality, but it is *not* required to be symmetric (the directed cycle
is the canonical asymmetric case).  Graph-like kinds (cycles and grids)
return exact integer distances; the point-cloud kind returns floats.

Balls are always counted by exact enumeration over the point set, never
by closed-form volume, so heterogeneous densities are handled uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "Space",
    "DirectedCycle",
    "UndirectedCycle",
    "Grid",
    "TreeLeaves",
    "Euclidean",
    "Ball",
    "doubling_constant_estimate",
]


@dataclass(frozen=True)
class Ball:
    """All points within ``radius`` of ``center`` (center included)."""

    center: int
    radius: float
    members: frozenset[int]


class Space:
    """Base interface: a distance kernel plus ball counting over ids."""

    kind: str = "abstract"
    is_graph_kind: bool = False
    is_symmetric: bool = True

    n: int

    # -- kernel -----------------------------------------------------------

    def distance(self, x: int, y: int):
        """Kernel distance from ``x`` to ``y`` (int for graph kinds)."""
        raise NotImplementedError

    def distances_from(self, x: int) -> np.ndarray:
        """Vector of ``distance(x, y)`` for every ``y``."""
        raise NotImplementedError

    def distances_to(self, x: int) -> np.ndarray:
        """Vector of ``distance(y, x)`` for every ``y``.

        Coincides with :meth:`distances_from` for symmetric kernels.
        """
        if self.is_symmetric:
            return self.distances_from(x)
        raise NotImplementedError

    def shell_order_from(self, x: int) -> tuple[np.ndarray, np.ndarray] | None:
        """Optional analytic candidate ordering for builders.

        Returns ``(order, sorted_distances)`` where ``order`` lists every
        vertex except ``x`` with nondecreasing distance from ``x``, or
        ``None`` if no closed form is available (builders then sort).
        """
        return None

    # -- adjacency and balls ----------------------------------------------

    def base_neighbors(self, x: int) -> list[int]:
        """Base-graph neighbors of ``x``: the vertices at distance exactly
        1 for graph kinds, the distance-minimal other vertices otherwise.
        """
        raise NotImplementedError

    def ball_count(self, center: int, radius) -> int:
        """|{y : distance(center, y) <= radius}| by exact enumeration."""
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        self._check_vertex(center)
        return int(np.count_nonzero(self.distances_from(center) <= radius))

    def ball(self, center: int, radius) -> Ball:
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        self._check_vertex(center)
        members = np.flatnonzero(self.distances_from(center) <= radius)
        return Ball(center, radius, frozenset(int(v) for v in members))

    def diameter(self):
        """Maximum kernel distance between any ordered pair."""
        raise NotImplementedError

    # -- helpers ------------------------------------------------------------

    def _check_vertex(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise ValueError(f"vertex id {x} out of range [0, {self.n})")

    def descriptor(self) -> dict:
        """Config-format description of this space (see harness docs)."""
        raise NotImplementedError


@dataclass(frozen=True)
class DirectedCycle(Space):
    """n vertices on a cycle with forward distance (y - x) mod n.

    The kernel is asymmetric: d(x, y) + d(y, x) = n for x != y.
    """

    n: int

    kind = "directed-cycle"
    is_graph_kind = True
    is_symmetric = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cycle needs n >= 1")

    def distance(self, x: int, y: int) -> int:
        self._check_vertex(x)
        self._check_vertex(y)
        return (y - x) % self.n

    def distances_from(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        return (np.arange(self.n, dtype=np.int64) - x) % self.n

    def distances_to(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        return (x - np.arange(self.n, dtype=np.int64)) % self.n

    def shell_order_from(self, x: int):
        ks = np.arange(1, self.n, dtype=np.int64)
        return (x + ks) % self.n, ks

    def base_neighbors(self, x: int) -> list[int]:
        self._check_vertex(x)
        return [] if self.n == 1 else [(x + 1) % self.n]

    def diameter(self) -> int:
        return self.n - 1

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n": self.n}


@dataclass(frozen=True)
class UndirectedCycle(Space):
    """n vertices on a cycle with wrap-around distance min(|x-y|, n-|x-y|)."""

    n: int

    kind = "undirected-cycle"
    is_graph_kind = True
    is_symmetric = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cycle needs n >= 1")

    def distance(self, x: int, y: int) -> int:
        self._check_vertex(x)
        self._check_vertex(y)
        a = abs(x - y)
        return min(a, self.n - a)

    def distances_from(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        a = np.abs(np.arange(self.n, dtype=np.int64) - x)
        return np.minimum(a, self.n - a)

    def shell_order_from(self, x: int):
        n = self.n
        if n == 1:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        ks = np.arange(1, n // 2 + 1, dtype=np.int64)
        order = np.empty(n - 1, dtype=np.int64)
        dist = np.empty(n - 1, dtype=np.int64)
        order[0::2] = (x + ks) % n
        dist[0::2] = ks
        back = ks if n % 2 == 1 else ks[:-1]
        order[1::2] = (x - back) % n
        dist[1::2] = back
        return order, dist

    def base_neighbors(self, x: int) -> list[int]:
        self._check_vertex(x)
        if self.n == 1:
            return []
        return sorted({(x + 1) % self.n, (x - 1) % self.n})

    def diameter(self) -> int:
        return self.n // 2

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n": self.n}


@dataclass(frozen=True)
class Grid(Space):
    """Axis-aligned lattice with L1 distance, optionally toric per axis."""

    dims: tuple[int, ...]
    toric: bool = False

    kind = "grid"
    is_graph_kind = True
    is_symmetric = True

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"grid dims must be positive, got {self.dims}")

    @property
    def n(self) -> int:
        return math.prod(self.dims)

    @cached_property
    def _coords(self) -> np.ndarray:
        # row-major: vertex id = np.ravel_multi_index(coord, dims)
        idx = np.unravel_index(np.arange(self.n), self.dims)
        return np.stack(idx, axis=1).astype(np.int64)

    def coord_of(self, x: int) -> tuple[int, ...]:
        self._check_vertex(x)
        return tuple(int(c) for c in self._coords[x])

    def vertex_at(self, coord: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(coord), self.dims))

    def distance(self, x: int, y: int) -> int:
        self._check_vertex(x)
        self._check_vertex(y)
        total = 0
        for cx, cy, length in zip(self._coords[x], self._coords[y], self.dims):
            a = abs(int(cx) - int(cy))
            total += min(a, length - a) if self.toric else a
        return total

    def distances_from(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        diff = np.abs(self._coords - self._coords[x])
        if self.toric:
            diff = np.minimum(diff, np.asarray(self.dims) - diff)
        return diff.sum(axis=1)

    def base_neighbors(self, x: int) -> list[int]:
        self._check_vertex(x)
        coord = self._coords[x]
        out: set[int] = set()
        for axis, length in enumerate(self.dims):
            if length == 1:
                continue
            for delta in (-1, 1):
                c = int(coord[axis]) + delta
                if self.toric:
                    c %= length
                elif not 0 <= c < length:
                    continue
                nb = list(coord)
                nb[axis] = c
                out.add(self.vertex_at(nb))
        out.discard(x)
        return sorted(out)

    def diameter(self) -> int:
        if self.toric:
            return sum(d // 2 for d in self.dims)
        return sum(d - 1 for d in self.dims)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims), "toric": self.toric}


@dataclass(frozen=True)
class TreeLeaves(Space):
    """Leaves of a complete b-ary tree with lowest-common-ancestor distance.

    d(x, y) is the number of edges from a leaf up to the smallest subtree
    containing both, so d(x, x) = 0 and the maximum distance equals the
    tree height.  Distances take only the values 0..height, which makes
    equal-distance shells very large.
    """

    branching: int
    height: int

    kind = "tree-leaves"
    is_graph_kind = False
    is_symmetric = True

    def __post_init__(self):
        if self.branching < 2:
            raise ValueError("branching must be >= 2")
        if self.height < 0:
            raise ValueError("height must be >= 0")

    @property
    def n(self) -> int:
        return self.branching**self.height

    @cached_property
    def _level_codes(self) -> list[np.ndarray]:
        # _level_codes[l][y] identifies the depth-(height-l) subtree of leaf y
        ids = np.arange(self.n, dtype=np.int64)
        codes = [ids]
        for _ in range(self.height):
            ids = ids // self.branching
            codes.append(ids)
        return codes

    def distance(self, x: int, y: int) -> int:
        self._check_vertex(x)
        self._check_vertex(y)
        level = 0
        while x != y:
            x //= self.branching
            y //= self.branching
            level += 1
        return level

    def distances_from(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        d = np.full(self.n, self.height, dtype=np.int64)
        codes = self._level_codes
        for level in range(self.height - 1, 0, -1):
            d[codes[level] == (x // self.branching**level)] = level
        d[x] = 0
        return d

    def base_neighbors(self, x: int) -> list[int]:
        self._check_vertex(x)
        if self.height == 0:
            return []
        parent = x // self.branching
        return [parent * self.branching + i
                for i in range(self.branching)
                if parent * self.branching + i != x]

    def diameter(self) -> int:
        return self.height

    def descriptor(self) -> dict:
        return {"kind": self.kind, "branching": self.branching, "height": self.height}


@dataclass(frozen=True, eq=False)
class Euclidean(Space):
    """Explicit point cloud with L2 distance.

    ``box`` records the sampling extents (upper bounds per coordinate) for
    provenance; distances depend only on the stored points.
    """

    points: np.ndarray
    box: tuple[float, ...] = ()

    kind = "euclidean"
    is_graph_kind = False
    is_symmetric = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, dim) array")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "box", tuple(float(b) for b in self.box))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def distance(self, x: int, y: int) -> float:
        self._check_vertex(x)
        self._check_vertex(y)
        return float(np.linalg.norm(self.points[x] - self.points[y]))

    def distances_from(self, x: int) -> np.ndarray:
        self._check_vertex(x)
        return np.linalg.norm(self.points - self.points[x], axis=1)

    def base_neighbors(self, x: int) -> list[int]:
        self._check_vertex(x)
        if self.n == 1:
            return []
        d = self.distances_from(x)
        d[x] = np.inf
        return [int(v) for v in np.flatnonzero(d == d.min())]

    def diameter(self) -> float:
        return max(float(self.distances_from(x).max()) for x in range(self.n))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n": self.n, "box": list(self.box)}


def doubling_constant_estimate(space: Space, radii: Sequence[float]) -> float:
    """Max over centers u and radii r of |B_2r(u)| / |B_r(u)|.

    Same-center reading of the doubling condition; exact enumeration, so
    O(n^2 * len(radii)) and intended for n up to a few thousand.
    """
    radii = list(radii)
    if not radii:
        raise ValueError("radii must be nonempty")
    if any(r < 0 for r in radii):
        raise ValueError("radii must be nonnegative")
    worst = 0.0
    for u in range(space.n):
        d = space.distances_from(u)
        for r in radii:
            small = int(np.count_nonzero(d <= r))
            big = int(np.count_nonzero(d <= 2 * r))
            worst = max(worst, big / small)
    return worst
