"""Tropical primitives over :class:`BigM` scalars.

Points live in the tropical projective torus, i.e. they are compared
modulo the all-ones vector.  Cells of a covector decomposition are
polytropes, stored as a matrix ``A`` of difference bounds
``x_j - x_k <= A[j][k]`` with :data:`INF` for an absent bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .bigm import BigM, INF, ZERO, Infinity, as_bigm, parse_bigm

__all__ = [
    "TorusPoint",
    "PointConfig",
    "CovectorGraph",
    "Polytrope",
    "InfeasibleCell",
    "asym_distance",
    "covector_graph_of_point",
    "polytrope_from_covector_graph",
    "kleene_closure",
    "tropical_vertices",
    "parse_config",
    "format_config",
    "format_point",
]


class InfeasibleCell(ValueError):
    """Raised when a difference-constraint system has a negative cycle."""

    def __init__(self, cycle: list[int], weight: BigM):
        self.cycle = cycle
        self.weight = weight
        pretty = " -> ".join(str(c + 1) for c in cycle + cycle[:1])
        super().__init__(f"negative cycle {pretty} of weight {weight}")


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """A point of R^N / R(1,...,1); equality ignores the all-ones direction."""

    coords: tuple[BigM, ...]

    def __init__(self, coords: Iterable):
        object.__setattr__(self, "coords", tuple(as_bigm(c) for c in coords))

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, j):
        return self.coords[j]

    def __iter__(self):
        return iter(self.coords)

    def canonical(self) -> "TorusPoint":
        """Representative with coordinate sum zero."""
        shift = sum(self.coords, ZERO) / len(self.coords)
        return TorusPoint(c - shift for c in self.coords)

    def _key(self):
        first = self.coords[0]
        return tuple(c - first for c in self.coords)

    def __eq__(self, other):
        if not isinstance(other, TorusPoint):
            return NotImplemented
        return len(self) == len(other) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def at(self, m0) -> "TorusPoint":
        return TorusPoint(c.at(m0) for c in self.coords)

    def __str__(self):
        return format_point(self)

    def __repr__(self):
        return f"TorusPoint({self})"


def format_point(x: Sequence[BigM], fmt=str) -> str:
    return "(" + ", ".join(fmt(c) for c in x) + ")"


class PointConfig:
    """``m`` points with ``N`` coordinates each; row ``i`` is ``u_i + M*w_i``."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(as_bigm(c) for c in r) for r in rows)
        if not rows:
            raise ValueError("a point configuration needs at least one point")
        width = len(rows[0])
        if width < 2:
            raise ValueError("points need at least two coordinates")
        if any(len(r) != width for r in rows):
            raise ValueError("all points must have the same number of coordinates")
        self.rows = rows

    @classmethod
    def from_affine(cls, U, W) -> "PointConfig":
        return cls(
            [BigM(u, w) for u, w in zip(urow, wrow)] for urow, wrow in zip(U, W)
        )

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def N(self) -> int:
        return len(self.rows[0])

    @property
    def U(self) -> list[list[Fraction]]:
        return [[c.const for c in r] for r in self.rows]

    @property
    def W(self) -> list[list[Fraction]]:
        return [[c.slope for c in r] for r in self.rows]

    @property
    def is_numeric(self) -> bool:
        return all(c.slope == 0 for r in self.rows for c in r)

    def at(self, m0) -> "PointConfig":
        return PointConfig([c.at(m0) for c in r] for r in self.rows)

    def point(self, i: int) -> TorusPoint:
        return TorusPoint(self.rows[i])

    def __eq__(self, other):
        return isinstance(other, PointConfig) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"PointConfig({self.m}x{self.N})"


@dataclass(frozen=True)
class CovectorGraph:
    """Bipartite graph on point nodes ``0..m-1`` and coordinate nodes ``0..N-1``."""

    m: int
    N: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def point_degree(self, i: int) -> int:
        return sum(1 for a, _ in self.edges if a == i)

    def isolated_points(self) -> list[int]:
        touched = {a for a, _ in self.edges}
        return [i for i in range(self.m) if i not in touched]

    def __le__(self, other: "CovectorGraph") -> bool:
        return self.edges <= other.edges

    def __str__(self):
        return " ".join(f"({i + 1},{j + 1})" for i, j in self.sorted_edges())


@dataclass(frozen=True)
class Polytrope:
    """Difference bounds ``x_j - x_k <= bounds[j][k]`` (``INF`` when absent)."""

    bounds: tuple[tuple[BigM | Infinity, ...], ...]

    def __post_init__(self):
        n = len(self.bounds)
        if any(len(r) != n for r in self.bounds):
            raise ValueError("difference-bound matrix must be square")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def is_bounded(self) -> bool:
        return not any(isinstance(a, Infinity) for r in self.bounds for a in r)

    def contains(self, x: Sequence[BigM]) -> bool:
        n = self.dim
        return all(
            x[j] - x[k] <= self.bounds[j][k]
            for j in range(n)
            for k in range(n)
            if not isinstance(self.bounds[j][k], Infinity)
        )

    def at(self, m0) -> "Polytrope":
        return Polytrope(tuple(
            tuple(a if isinstance(a, Infinity) else a.at(m0) for a in r)
            for r in self.bounds
        ))


def asym_distance(x: Sequence[BigM], y: Sequence[BigM]) -> BigM:
    """``sum_i (x_i - y_i) - N * min_j (x_j - y_j)``; nonnegative, not symmetric."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    diffs = [as_bigm(a) - as_bigm(b) for a, b in zip(x, y)]
    return sum(diffs, ZERO) - min(diffs) * len(diffs)


def covector_graph_of_point(x: Sequence[BigM], V: PointConfig) -> CovectorGraph:
    """Edge ``(i, j)`` iff coordinate ``j`` attains ``max_k (v_ik - x_k)``."""
    if len(x) != V.N:
        raise ValueError(f"point has {len(x)} coordinates, configuration has {V.N}")
    edges = set()
    for i, row in enumerate(V.rows):
        shifted = [v - c for v, c in zip(row, x)]
        top = max(shifted)
        edges.update((i, j) for j, s in enumerate(shifted) if s == top)
    return CovectorGraph(V.m, V.N, frozenset(edges))


def polytrope_from_covector_graph(G: CovectorGraph, V: PointConfig) -> Polytrope:
    if not G.edges:
        raise ValueError("covector graph has no edges")
    N = V.N
    A: list[list[BigM | Infinity]] = [[INF] * N for _ in range(N)]
    for i, j in G.edges:
        row = V.rows[i]
        for k in range(N):
            bound = row[j] - row[k]
            if bound < A[j][k]:
                A[j][k] = bound
    return Polytrope(tuple(tuple(r) for r in A))


def kleene_closure(P: Polytrope) -> Polytrope:
    """All-pairs shortest paths over (min, +); raises :class:`InfeasibleCell`."""
    n = P.dim
    A = [list(r) for r in P.bounds]
    for j in range(n):
        if A[j][j] < ZERO:
            raise InfeasibleCell(*_negative_cycle(P.bounds))
        A[j][j] = ZERO
    for l in range(n):
        row_l = A[l]
        for j in range(n):
            a_jl = A[j][l]
            if isinstance(a_jl, Infinity):
                continue
            row_j = A[j]
            for k in range(n):
                a_lk = row_l[k]
                if isinstance(a_lk, Infinity):
                    continue
                cand = a_jl + a_lk
                if cand < row_j[k]:
                    row_j[k] = cand
        if any(A[j][j] < ZERO for j in range(n)):
            raise InfeasibleCell(*_negative_cycle(P.bounds))
    return Polytrope(tuple(tuple(r) for r in A))


def _negative_cycle(bounds) -> tuple[list[int], BigM]:
    # Bellman-Ford from a virtual source joined to every node by a 0 arc
    n = len(bounds)
    dist = [ZERO] * n
    pred: list[int | None] = [None] * n
    last = None
    for _ in range(n):
        last = None
        for j in range(n):
            for k in range(n):
                w = bounds[j][k]
                if isinstance(w, Infinity):
                    continue
                if dist[j] + w < dist[k]:
                    dist[k] = dist[j] + w
                    pred[k] = j
                    last = k
        if last is None:
            raise RuntimeError("no negative cycle present")
    node = last
    for _ in range(n):
        node = pred[node]
    cycle = [node]
    cur = pred[node]
    while cur != node:
        cycle.append(cur)
        cur = pred[cur]
    cycle.reverse()
    weight = sum((bounds[a][b] for a, b in zip(cycle, cycle[1:] + cycle[:1])), ZERO)
    return cycle, weight


def tropical_vertices(P: Polytrope) -> list[TorusPoint]:
    """Max-tropical generators of a bounded, closed polytrope.

    Vertex ``k`` maximizes ``N*x_k - sum(x)``, so ``x_k - x_j`` sits at its
    upper bound for every ``j``: the point ``x_j = -A[k][j]``.
    """
    if not P.is_bounded:
        raise ValueError("polytrope is unbounded")
    n = P.dim
    for j in range(n):
        if P.bounds[j][j] < ZERO:
            raise InfeasibleCell([j], P.bounds[j][j])
    seen: dict[TorusPoint, None] = {}
    for k in range(n):
        pt = TorusPoint(-P.bounds[k][j] for j in range(n)).canonical()
        seen.setdefault(pt, None)
    return list(seen)


# -- text I/O ---------------------------------------------------------------

def parse_config(text: str) -> PointConfig:
    """One point per line, whitespace- or comma-separated BigM literals; ``#`` comments."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            rows.append([parse_bigm(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if rows and any(len(r) != len(rows[0]) for r in rows):
        bad = next(i for i, r in enumerate(rows) if len(r) != len(rows[0]))
        raise ValueError(f"row {bad + 1} has {len(rows[bad])} entries, expected {len(rows[0])}")
    return PointConfig(rows)


def format_config(V: PointConfig) -> str:
    return "".join(" ".join(str(c) for c in r) + "\n" for r in V.rows)
