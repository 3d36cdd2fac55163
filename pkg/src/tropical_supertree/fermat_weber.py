"""Tropical Fermat-Weber sets, tropical medians and the stabilization bound.

The Fermat-Weber set of a configuration ``V`` is the central cell of its
covector decomposition.  Its covector graph is the union of the supports
of the optimal solutions of the transportation problem that maximizes
``sum v_ij * flow_ij`` with every point supplying ``N`` and every
coordinate demanding ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .bigm import BigM, ZERO
from .tropical import (
    CovectorGraph,
    InfeasibleCell,
    PointConfig,
    Polytrope,
    TorusPoint,
    asym_distance,
    kleene_closure,
    polytrope_from_covector_graph,
    tropical_vertices,
)
from .transport import TransportationInstance, optimal_support, solve_max_transport

__all__ = [
    "InternalError",
    "FermatWeberResult",
    "CentralCell",
    "fw_objective",
    "central_cell",
    "central_covector_graph",
    "fermat_weber",
    "stabilization_threshold",
]


class InternalError(RuntimeError):
    """A state the underlying theory rules out; always a bug, never bad input."""


def fw_objective(x: Sequence[BigM], V: PointConfig) -> BigM:
    """Sum of asymmetric distances from ``x`` to every point of ``V``.

    ``x`` is the first argument of the distance; with this orientation the
    minimizers form the central cell of the max-covector decomposition.
    """
    return sum((asym_distance(x, row) for row in V.rows), ZERO)


@dataclass
class CentralCell:
    graph: CovectorGraph
    instance: TransportationInstance
    transport_value: BigM
    tight_edges: list[tuple[int, int]]
    witnesses: dict = field(repr=False)
    pivots: int = 0


def central_cell(V: PointConfig, jobs: int = 1) -> CentralCell:
    inst = TransportationInstance.barycentric(V.rows)
    sol = solve_max_transport(inst)
    edges, witnesses = optimal_support(inst, sol, jobs=jobs)
    graph = CovectorGraph(V.m, V.N, frozenset(edges))
    return CentralCell(graph, inst, sol.value, sol.tight_edges(inst), witnesses, sol.pivots)


def central_covector_graph(V: PointConfig, jobs: int = 1) -> CovectorGraph:
    return central_cell(V, jobs=jobs).graph


@dataclass
class FermatWeberResult:
    graph: CovectorGraph
    polytrope: Polytrope
    vertices: list[TorusPoint]
    median: TorusPoint
    objective: BigM
    cell: CentralCell | None = field(default=None, repr=False)

    def at(self, m0) -> dict:
        return {
            "vertices": [v.at(m0) for v in self.vertices],
            "median": self.median.at(m0),
            "objective": self.objective.at(m0),
        }


def fermat_weber(V: PointConfig, jobs: int = 1, check: bool = True) -> FermatWeberResult:
    """Fermat-Weber set, its tropical vertices and the tropical median of ``V``."""
    cell = central_cell(V, jobs=jobs)
    try:
        closed = kleene_closure(polytrope_from_covector_graph(cell.graph, V))
    except InfeasibleCell as exc:
        raise InternalError(f"central covector cell is empty: {exc}") from exc
    if not closed.is_bounded:
        raise InternalError("central covector cell is unbounded")
    vertices = tropical_vertices(closed)
    n = len(vertices)
    median = TorusPoint(
        sum((v[j] for v in vertices), ZERO) / n for j in range(V.N)
    ).canonical()
    objective = fw_objective(median, V)
    if check:
        _check_result(V, closed, vertices, median, objective)
    return FermatWeberResult(cell.graph, closed, vertices, median, objective, cell)


def _check_result(V, closed, vertices, median, objective):
    if len(vertices) > V.N:
        raise InternalError(f"{len(vertices)} tropical vertices in dimension {V.N}")
    if not closed.contains(median.coords):
        raise InternalError("tropical median lies outside the Fermat-Weber cell")
    for v in vertices:
        if fw_objective(v, V) != objective:
            raise InternalError(f"vertex {v} is not optimal")


def stabilization_threshold(U: Sequence[Sequence], W: Sequence[Sequence]) -> Fraction:
    """``binom(m+N-2, m-1) * ||U||_1`` for the affine family ``U + M*W``; ``W`` integral."""
    m = len(U)
    if m == 0 or len(W) != m:
        raise ValueError("U and W must have the same positive number of rows")
    N = len(U[0])
    if any(len(r) != N for r in U) or any(len(r) != N for r in W):
        raise ValueError("U and W must have the same shape")
    for i, row in enumerate(W):
        for j, w in enumerate(row):
            if Fraction(w).denominator != 1:
                raise ValueError(f"W[{i + 1}][{j + 1}] = {w} is not an integer")
    norm = sum(abs(Fraction(u)) for row in U for u in row)
    return comb(m + N - 2, m - 1) * norm
