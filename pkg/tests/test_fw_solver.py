import random
from fractions import Fraction

import pytest

from tropical_supertree.bigm import M, ZERO, BigM
from tropical_supertree.fermat_weber import (
    central_cell,
    central_covector_graph,
    fermat_weber,
    fw_objective,
    stabilization_threshold,
)
from tropical_supertree.oracle import oracle_cell_bounds, oracle_face_extremes, oracle_fw_min
from tropical_supertree.tropical import (
    PointConfig,
    TorusPoint,
    asym_distance,
    covector_graph_of_point,
)
from tropical_supertree.transport import TransportationInstance, probe_edge, solve_max_transport

FAMILY_U = [[2, -3, 1], [-6, 2, 4], [4, -10, 6]]
FAMILY_W = [[1, -1, 0], [0, 0, 0], [-1, -1, 2]]
FAMILY = PointConfig.from_affine(FAMILY_U, FAMILY_W)


def random_config(rng, m, N, lo=-20, hi=20):
    return PointConfig([[rng.randint(lo, hi) for _ in range(N)] for _ in range(m)])


def random_family(rng, m, N):
    U = [[rng.randint(-6, 6) for _ in range(N)] for _ in range(m)]
    W = [[rng.randint(-2, 2) for _ in range(N)] for _ in range(m)]
    return U, W


def test_single_point():
    V = PointConfig([[3, -1, 4]])
    res = fermat_weber(V)
    assert res.vertices == [V.point(0)]
    assert res.median == V.point(0)
    assert res.objective == ZERO
    assert res.graph.sorted_edges() == [(0, 0), (0, 1), (0, 2)]


def test_objective_of_repeated_point_doubles():
    V = PointConfig([[1, 5, -2], [1, 5, -2]])
    x = [BigM(0), BigM(3), BigM(7)]
    assert fw_objective(x, V) == 2 * asym_distance(x, V.rows[0])
    assert fermat_weber(V).median == V.point(0)


def test_three_point_family_symbolic():
    res = fermat_weber(FAMILY)
    third = Fraction(1, 3)
    assert res.median.coords == (ZERO, BigM(-11 * third, -2 * third), BigM(11 * third, 2 * third))
    assert set(res.vertices) == {FAMILY.point(i) for i in range(3)}
    assert str(res.graph) == "(1,1) (2,2) (3,3)"
    assert res.objective == BigM(30, 9)


def test_three_point_family_matches_oracle_at_1000():
    res = fermat_weber(FAMILY)
    V = FAMILY.at(1000)
    _, best = oracle_fw_min(V)
    assert best == fw_objective(res.median.at(1000), V) == res.objective.eval(1000)


def test_three_point_family_graph_at_two_large_values():
    G = central_covector_graph(FAMILY)
    assert central_covector_graph(FAMILY.at(300)) == G
    assert central_covector_graph(FAMILY.at(10**6)) == G


def test_oracle_single_point():
    V = PointConfig([[3, -1, 4]])
    x, best = oracle_fw_min(V)
    assert x == V.point(0) and best == 0


def test_two_point_minimum_matches_grid_refinement():
    rng = random.Random(2)
    for _ in range(5):
        V = random_config(rng, 2, 3, -6, 6)
        _, best = oracle_fw_min(V)
        for step in (Fraction(1), Fraction(1, 2)):
            grid = [step * k for k in range(int(-14 / step), int(14 / step) + 1)]
            found = min(
                fw_objective([BigM(0), BigM(a), BigM(b)], V) for a in grid for b in grid
            )
            assert found == BigM(best)
        assert fermat_weber(V).objective == BigM(best)


def test_random_configs_match_oracle():
    rng = random.Random(7)
    for _ in range(40):
        V = random_config(rng, 4, 3)
        res = fermat_weber(V)
        x, best = oracle_fw_min(V)
        assert res.objective == BigM(best)
        assert res.polytrope.contains(x.coords)


def test_closed_cell_equals_oracle_face_bounds():
    rng = random.Random(8)
    for _ in range(15):
        V = random_config(rng, rng.randint(2, 4), rng.randint(2, 4), -8, 8)
        P = fermat_weber(V).polytrope
        B = oracle_cell_bounds(V)
        for j in range(V.N):
            for k in range(V.N):
                assert P.bounds[j][k] == BigM(B[j][k])


def test_central_graph_equals_graph_of_interior_optimum():
    rng = random.Random(9)
    for _ in range(15):
        V = random_config(rng, 3, 3, -8, 8)
        pts = [p for _, p in oracle_face_extremes(V).values()]
        # positive combination of face extremes lies in the relative interior
        inner = TorusPoint(sum((p[j] for p in pts), ZERO) / len(pts) for j in range(V.N))
        assert covector_graph_of_point(inner.coords, V) == central_covector_graph(V)


def test_support_edges_have_witnesses_and_others_fail():
    rng = random.Random(10)
    for _ in range(15):
        V = random_config(rng, 3, 4, -5, 5)
        cell = central_cell(V)
        inst = cell.instance
        for e in cell.graph.edges:
            flow = cell.witnesses[e]
            assert flow[e[0]][e[1]] > 0
            assert all(sum(r) == s for r, s in zip(flow, inst.supply))
            value = sum(
                (inst.profit[i][j].scale(flow[i][j]) for i in range(V.m) for j in range(V.N)), ZERO
            )
            assert value == cell.transport_value
        for e in set(cell.tight_edges) - cell.graph.edges:
            assert probe_edge(inst, cell.tight_edges, e) is None


def test_transport_on_tiny_instance():
    inst = TransportationInstance(
        [[BigM(3), BigM(1)], [BigM(2), BigM(4)]], [Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]
    )
    sol = solve_max_transport(inst)
    assert sol.value == BigM(7)
    assert sol.flow == [[1, 0], [0, 1]]
    assert all(sol.reduced_profit(inst, i, j) >= ZERO for i in range(2) for j in range(2))


@pytest.mark.parametrize(
    "U, expected",
    [([[0, 0], [0, 0]], 0), ([[1, -1], [2, 0]], 8), (FAMILY_U, 228)],
)
def test_threshold_examples(U, expected):
    W = [[0] * len(U[0]) for _ in U]
    assert stabilization_threshold(U, W) == expected


def test_threshold_rejects_fractional_slopes():
    with pytest.raises(ValueError):
        stabilization_threshold([[1, 2]], [[Fraction(1, 2), 0]])


def test_graph_stabilizes_past_threshold():
    rng = random.Random(12)
    for _ in range(25):
        U, W = random_family(rng, rng.randint(1, 4), rng.randint(2, 4))
        V = PointConfig.from_affine(U, W)
        thr = stabilization_threshold(U, W)
        G = central_covector_graph(V)
        for m0 in (thr + 1, 2 * thr + 7):
            assert central_covector_graph(V.at(m0)) == G


def test_symbolic_median_evaluates_to_numeric_median():
    rng = random.Random(13)
    for _ in range(10):
        U, W = random_family(rng, 3, 3)
        V = PointConfig.from_affine(U, W)
        m0 = stabilization_threshold(U, W) + 1
        sym = fermat_weber(V)
        num = fermat_weber(V.at(m0))
        assert sym.median.at(m0) == num.median
        assert sym.objective.eval(m0) == num.objective.eval(0)


def test_parallel_probes_match_serial():
    V = PointConfig.from_affine([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], [[0] * 4] * 3)
    assert central_covector_graph(V, jobs=2) == central_covector_graph(V)


def test_median_is_symbolic_when_input_is():
    res = fermat_weber(PointConfig([[M, ZERO], [ZERO, ZERO]]))
    assert any(not c.is_constant for c in res.median)
