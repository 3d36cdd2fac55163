"""Transportation problems with BigM costs, solved by the network simplex.

The instance ships ``supply[i]`` from each row node to the column nodes,
each of which must receive exactly ``demand[j]``; every row/column pair is
an arc.  Costs are :class:`BigM`, flows are exact rationals.  Pivots use
Bland's rule, so the pivot sequence is deterministic and terminates.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .bigm import BigM, ZERO

__all__ = [
    "TransportationInstance",
    "TransportSolution",
    "solve_max_transport",
    "optimal_support",
    "probe_edge",
]


@dataclass(frozen=True)
class TransportationInstance:
    """Maximize ``sum profit[i][j] * flow[i][j]`` subject to row and column totals."""

    profit: tuple[tuple[BigM, ...], ...]
    supply: tuple[Fraction, ...]
    demand: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.profit) != len(self.supply):
            raise ValueError("one supply per row required")
        if any(len(r) != len(self.demand) for r in self.profit):
            raise ValueError("one demand per column required")
        if any(s <= 0 for s in self.supply) or any(d <= 0 for d in self.demand):
            raise ValueError("supplies and demands must be positive")
        if sum(self.supply) != sum(self.demand):
            raise ValueError("total supply differs from total demand")

    @classmethod
    def barycentric(cls, profit: Sequence[Sequence[BigM]]) -> "TransportationInstance":
        """Rows supply ``N`` each, columns demand ``m`` each (the scaled barycenter)."""
        m, n = len(profit), len(profit[0])
        return cls(
            tuple(tuple(r) for r in profit),
            tuple(Fraction(n) for _ in range(m)),
            tuple(Fraction(m) for _ in range(n)),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.supply), len(self.demand)


@dataclass
class TransportSolution:
    flow: list[list[Fraction]]
    row_potential: list[BigM]
    col_potential: list[BigM]
    value: BigM
    pivots: int
    basis: set[tuple[int, int]] = field(default_factory=set)

    def reduced_profit(self, inst: TransportationInstance, i: int, j: int) -> BigM:
        # >= 0 for every arc at optimality; zero on tight arcs
        return self.row_potential[i] + self.col_potential[j] - inst.profit[i][j]

    def tight_edges(self, inst: TransportationInstance) -> list[tuple[int, int]]:
        m, n = inst.shape
        return [
            (i, j)
            for i in range(m)
            for j in range(n)
            if self.reduced_profit(inst, i, j) == ZERO
        ]


def _northwest_corner(inst: TransportationInstance):
    m, n = inst.shape
    supply = list(inst.supply)
    demand = list(inst.demand)
    flow = [[Fraction(0)] * n for _ in range(m)]
    basis = set()
    i = j = 0
    while i < m and j < n:
        q = min(supply[i], demand[j])
        flow[i][j] = q
        basis.add((i, j))
        supply[i] -= q
        demand[j] -= q
        if supply[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    assert len(basis) == m + n - 1
    return flow, basis


def _tree_adjacency(basis, m, n):
    adj = {("r", i): [] for i in range(m)}
    adj.update({("c", j): [] for j in range(n)})
    for i, j in basis:
        adj[("r", i)].append(("c", j))
        adj[("c", j)].append(("r", i))
    return adj


def _potentials(inst, basis):
    # potentials u_i + w_j = profit on every basic arc, anchored at u_0 = 0
    m, n = inst.shape
    adj = _tree_adjacency(basis, m, n)
    u: list[BigM | None] = [None] * m
    w: list[BigM | None] = [None] * n
    u[0] = ZERO
    queue = deque([("r", 0)])
    while queue:
        kind, a = queue.popleft()
        for nb in adj[(kind, a)]:
            _, b = nb
            if kind == "r" and w[b] is None:
                w[b] = inst.profit[a][b] - u[a]
                queue.append(nb)
            elif kind == "c" and u[b] is None:
                u[b] = inst.profit[b][a] - w[a]
                queue.append(nb)
    return u, w


def _tree_path(basis, m, n, start, goal):
    adj = _tree_adjacency(basis, m, n)
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb in sorted(adj[node]):
            if nb not in prev:
                prev[nb] = node
                queue.append(nb)
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def solve_max_transport(inst: TransportationInstance, max_pivots: int = 1_000_000) -> TransportSolution:
    """Network simplex with Bland's rule on a maximization transportation problem."""
    m, n = inst.shape
    flow, basis = _northwest_corner(inst)
    pivots = 0
    while True:
        u, w = _potentials(inst, basis)
        entering = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis and u[i] + w[j] < inst.profit[i][j]:
                    entering = (i, j)
                    break
            if entering:
                break
        if entering is None:
            break
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("network simplex exceeded the pivot limit")
        p, q = entering
        path = _tree_path(basis, m, n, ("r", p), ("c", q))
        cells = []
        for a, b in zip(path, path[1:]):
            cells.append((a[1], b[1]) if a[0] == "r" else (b[1], a[1]))
        # cells alternate -, +, -, ... starting next to the entering arc
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[i][j] for i, j in minus)
        leaving = min(c for c in minus if flow[c[0]][c[1]] == theta)
        flow[p][q] += theta
        for i, j in minus:
            flow[i][j] -= theta
        for i, j in plus:
            flow[i][j] += theta
        basis.remove(leaving)
        basis.add(entering)
    value = sum(
        (inst.profit[i][j] * flow[i][j] for i in range(m) for j in range(n) if flow[i][j]),
        ZERO,
    )
    return TransportSolution(flow, u, w, value, pivots, set(basis))


def probe_edge(inst: TransportationInstance, arcs: Sequence[tuple[int, int]], edge: tuple[int, int]):
    """Try to route one unit on ``edge`` and the rest on ``arcs``.

    Returns a full flow matrix when that is feasible, else None.  Supplies
    and demands are integral here, so any vertex of the restricted
    transportation polytope is integral and one unit suffices.
    """
    m, n = inst.shape
    i0, j0 = edge
    g = nx.DiGraph()
    for i in range(m):
        cap = inst.supply[i] - (1 if i == i0 else 0)
        g.add_edge("s", ("r", i), capacity=int(cap))
    for j in range(n):
        cap = inst.demand[j] - (1 if j == j0 else 0)
        g.add_edge(("c", j), "t", capacity=int(cap))
    for i, j in arcs:
        g.add_edge(("r", i), ("c", j))
    need = int(sum(inst.supply)) - 1
    value, fdict = nx.maximum_flow(g, "s", "t")
    if value != need:
        return None
    flow = [[Fraction(0)] * n for _ in range(m)]
    for i, j in arcs:
        flow[i][j] = Fraction(fdict[("r", i)].get(("c", j), 0))
    flow[i0][j0] += 1
    return flow


def _probe_task(args):
    inst, arcs, edge = args
    return probe_edge(inst, arcs, edge)


def optimal_support(inst: TransportationInstance, sol: TransportSolution, jobs: int = 1):
    """Arcs carrying positive flow in some optimal solution, with a witness flow each.

    Every optimal flow lives on the arcs with zero reduced profit for the
    optimal potentials in ``sol``; each such arc is probed for feasibility.
    """
    if any(d.denominator != 1 for d in inst.supply + inst.demand):
        raise ValueError("support probing needs integral supplies and demands")
    tight = sol.tight_edges(inst)
    witnesses: dict[tuple[int, int], list[list[Fraction]]] = {}
    todo = []
    for i, j in tight:
        if sol.flow[i][j] > 0:
            witnesses[(i, j)] = sol.flow
        else:
            todo.append((i, j))
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_probe_task, [(inst, tight, e) for e in todo]))
    else:
        results = [probe_edge(inst, tight, e) for e in todo]
    for e, flow in zip(todo, results):
        if flow is not None:
            witnesses[e] = flow
    return sorted(witnesses), witnesses
