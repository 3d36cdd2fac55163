import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from tropical_supertree.bigm import INF, M, ZERO, BigM
from tropical_supertree.oracle import dense_simplex_max
from tropical_supertree.tropical import (
    CovectorGraph,
    InfeasibleCell,
    PointConfig,
    Polytrope,
    TorusPoint,
    asym_distance,
    covector_graph_of_point,
    format_config,
    kleene_closure,
    parse_config,
    polytrope_from_covector_graph,
    tropical_vertices,
)

FAMILY = PointConfig(
    [
        [BigM(2, 1), BigM(-3, -1), BigM(1)],
        [BigM(-6), BigM(2), BigM(4)],
        [BigM(4, -1), BigM(-10, -1), BigM(6, 2)],
    ]
)

ints = st.integers(-20, 20)


def pt(*xs):
    return [BigM(x) for x in xs]


@pytest.mark.parametrize(
    "x, y, d",
    [((7, -1, 3), (7, -1, 3), 0), ((0, 0), (0, -1), 1), ((1, 2, 3), (3, 2, 1), 6)],
)
def test_distance_examples(x, y, d):
    assert asym_distance(pt(*x), pt(*y)) == BigM(d)


@given(st.lists(ints, min_size=2, max_size=5), st.data(), st.fractions(-10, 10, max_denominator=7))
def test_distance_is_torus_invariant_and_nonnegative(x, data, c):
    y = data.draw(st.lists(ints, min_size=len(x), max_size=len(x)))
    X, Y = pt(*x), pt(*y)
    d = asym_distance(X, Y)
    assert asym_distance([v + BigM(c) for v in X], Y) == d
    assert asym_distance(X, [v + BigM(c) for v in Y]) == d
    assert d >= ZERO
    assert (d == ZERO) == (TorusPoint(X) == TorusPoint(Y))


def test_torus_point_canonical_sums_to_zero():
    p = TorusPoint(pt(3, 5, 10)).canonical()
    assert sum(p.coords, ZERO) == ZERO
    assert p == TorusPoint(pt(0, 2, 7))


def test_single_point_graph_is_complete_star():
    V = PointConfig([pt(3, -1, 4, 1)])
    G = covector_graph_of_point(V.rows[0], V)
    assert G.sorted_edges() == [(0, j) for j in range(4)]


def test_three_point_family_graph_at_second_row():
    G = covector_graph_of_point(FAMILY.rows[1], FAMILY)
    assert G.sorted_edges() == [(0, 0), (1, 0), (1, 1), (1, 2), (2, 2)]
    assert str(G) == "(1,1) (2,1) (2,2) (2,3) (3,3)"


def test_far_coordinate_collects_all_edges():
    V = PointConfig([pt(1, 5, -2), pt(0, 0, 0), pt(-3, 7, 2)])
    x = pt(0, 0, -1000)
    G = covector_graph_of_point(x, V)
    assert G.sorted_edges() == [(0, 2), (1, 2), (2, 2)]


def test_point_cell_is_the_point():
    V = PointConfig([pt(3, -1, 4)])
    G = covector_graph_of_point(V.rows[0], V)
    P = kleene_closure(polytrope_from_covector_graph(G, V))
    assert P.dim == 3 and P.is_bounded
    verts = tropical_vertices(P)
    assert verts == [TorusPoint(pt(3, -1, 4))]


def test_missing_coordinate_gives_unbounded_row():
    V = PointConfig([pt(0, 0, 0)])
    G = CovectorGraph(1, 3, frozenset({(0, 0), (0, 1)}))
    P = polytrope_from_covector_graph(G, V)
    assert all(P.bounds[2][k] is INF for k in range(3) if k != 2)
    assert not kleene_closure(P).is_bounded


def test_negative_cycle_is_infeasible():
    P = Polytrope([[ZERO, BigM(3)], [BigM(-5), ZERO]])
    with pytest.raises(InfeasibleCell) as info:
        kleene_closure(P)
    assert info.value.weight == BigM(-2)
    assert sorted(set(info.value.cycle)) == [0, 1]


def _random_feasible_bounds(rng, n):
    x = [rng.randint(-10, 10) for _ in range(n)]
    return [
        [ZERO if j == k else BigM(x[j] - x[k] + rng.randint(0, 8)) for k in range(n)]
        for j in range(n)
    ]


def test_closure_triangle_inequality_and_idempotence():
    rng = random.Random(4)
    for _ in range(30):
        P = kleene_closure(Polytrope(_random_feasible_bounds(rng, 4)))
        A = P.bounds
        for j, k, l in product(range(4), repeat=3):
            assert A[j][k] <= A[j][l] + A[l][k]
        assert all(A[j][j] == ZERO for j in range(4))
        assert kleene_closure(P).bounds == A


def test_closure_keeps_symbolic_bounds_exact():
    P = kleene_closure(Polytrope([[ZERO, M, INF], [BigM(1), ZERO, BigM(2)], [M, BigM(-1), ZERO]]))
    assert P.bounds[0][2] == BigM(2, 1)
    assert P.bounds[2][0] == BigM(0)


def _lp_vertex(P, k):
    # maximize N*x_k - sum(x) over the polytrope with x_0 pinned, split variables
    n = P.dim
    nvar = 2 * n
    A, b = [], []
    for j in range(n):
        for l in range(n):
            if j != l and P.bounds[j][l] is not INF:
                row = [0] * nvar
                row[2 * j] += 1
                row[2 * j + 1] -= 1
                row[2 * l] -= 1
                row[2 * l + 1] += 1
                A.append(row)
                b.append(P.bounds[j][l].const)
    row = [0] * nvar
    row[0], row[1] = 1, -1
    A.append(row)
    b.append(0)
    A.append([-v for v in row])
    b.append(0)
    c = [0] * nvar
    for j in range(n):
        w = (n if j == k else 0) - 1
        c[2 * j] += w
        c[2 * j + 1] -= w
    _, val = dense_simplex_max(c, A, b)
    return val


def test_vertices_maximize_the_coordinate_functionals():
    rng = random.Random(11)
    for _ in range(25):
        P = kleene_closure(Polytrope(_random_feasible_bounds(rng, 4)))
        verts = tropical_vertices(P)
        assert 1 <= len(verts) <= 4
        for v in verts:
            assert P.contains(v.coords)
        values = {k: _lp_vertex(P, k) for k in range(4)}
        scores = [[4 * v[k].const - sum(c.const for c in v) for k in range(4)] for v in verts]
        for k in range(4):
            assert max(s[k] for s in scores) == values[k]
        for s in scores:
            assert any(s[k] == values[k] for k in range(4))


def test_tropical_segment_has_two_vertices():
    # comparable points a <= b coordinatewise give an ordinary segment along (0,1,1)
    a, b = (0, 0, 0), (0, 3, 3)
    bounds = [[ZERO, BigM(0), BigM(0)], [BigM(3), ZERO, BigM(0)], [BigM(3), BigM(0), ZERO]]
    P = kleene_closure(Polytrope(bounds))
    verts = set(tropical_vertices(P))
    assert verts == {TorusPoint(pt(*a)), TorusPoint(pt(*b))}


def test_three_point_family_vertices_are_the_rows():
    from tropical_supertree.fermat_weber import central_covector_graph

    G = central_covector_graph(FAMILY)
    P = kleene_closure(polytrope_from_covector_graph(G, FAMILY))
    assert set(tropical_vertices(P)) == {FAMILY.point(i) for i in range(3)}


def test_vertices_reject_unbounded():
    P = Polytrope([[ZERO, INF], [BigM(0), ZERO]])
    with pytest.raises(ValueError):
        tropical_vertices(P)


def test_config_round_trip_and_errors():
    text = format_config(FAMILY)
    assert parse_config(text) == FAMILY
    assert parse_config("# comment\n1, 2\n3 4\n").m == 2
    with pytest.raises(ValueError, match="line 2"):
        parse_config("1 2\n3 x\n")
    with pytest.raises(ValueError):
        parse_config("1 2\n3\n")
    with pytest.raises(ValueError):
        parse_config("1\n2\n")
