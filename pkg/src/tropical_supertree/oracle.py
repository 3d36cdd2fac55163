"""Independent verification path: a dense exact-rational simplex.

Nothing here touches the network simplex or the covector machinery.  It
minimizes the Fermat-Weber objective as an ordinary linear program and is
meant for small numeric instances in tests.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .tropical import PointConfig, TorusPoint

__all__ = ["LPError", "dense_simplex_max", "oracle_fw_min", "oracle_cell_bounds", "oracle_face_extremes"]


class LPError(ArithmeticError):
    pass


def _pivot(T, rhs, r, c):
    pr = T[r]
    piv = pr[c]
    if piv != 1:
        T[r] = pr = [a / piv for a in pr]
        rhs[r] /= piv
    for i, row in enumerate(T):
        if i != r and row[c] != 0:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, pr)]
            rhs[i] -= f * rhs[r]


def _run(T, rhs, basis, cost, allowed):
    """Maximize ``cost`` over the tableau with Bland's rule; columns outside ``allowed`` never enter."""
    ncols = len(cost)
    while True:
        entering = None
        for j in range(ncols):
            if not allowed[j] or j in basis:
                continue
            red = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(len(T)))
            if red > 0:
                entering = j
                break
        if entering is None:
            return
        best = None
        for i, row in enumerate(T):
            if row[entering] > 0:
                ratio = rhs[i] / row[entering]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise LPError("linear program is unbounded")
        r = best[1]
        _pivot(T, rhs, r, entering)
        basis[r] = entering


def dense_simplex_max(c: Sequence, A: Sequence[Sequence], b: Sequence):
    """Maximize ``c.z`` subject to ``A z <= b``, ``z >= 0``; returns ``(z, value)``."""
    c = [Fraction(v) for v in c]
    n = len(c)
    rows = len(A)
    # columns: structural n, slack rows, artificial rows
    width = n + 2 * rows
    T, rhs, basis = [], [], []
    for i, (arow, bi) in enumerate(zip(A, b)):
        row = [Fraction(v) for v in arow] + [Fraction(0)] * (2 * rows)
        row[n + i] = Fraction(1)
        bi = Fraction(bi)
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            row[n + rows + i] = Fraction(1)
            basis.append(n + rows + i)
        else:
            basis.append(n + i)
        T.append(row)
        rhs.append(bi)
    artificial = [False] * (n + rows) + [True] * rows
    phase1 = [Fraction(0)] * (n + rows) + [Fraction(-1)] * rows
    _run(T, rhs, basis, phase1, [True] * width)
    if any(artificial[basis[i]] and rhs[i] != 0 for i in range(rows)):
        raise LPError("linear program is infeasible")
    # drive zero-level artificials out of the basis where possible
    for i in range(rows):
        if artificial[basis[i]]:
            for j in range(n + rows):
                if T[i][j] != 0:
                    _pivot(T, rhs, i, j)
                    basis[i] = j
                    break
    cost = c + [Fraction(0)] * (2 * rows)
    _run(T, rhs, basis, cost, [not a for a in artificial])
    z = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            z[j] = rhs[i]
    return z, sum(ci * zi for ci, zi in zip(c, z))


def _fw_lp(V: PointConfig):
    if not V.is_numeric:
        raise ValueError("the oracle only handles numeric configurations")
    m, N = V.m, V.N
    v = V.U
    # variables: x_1..x_{N-1} (x_0 = 0) and y_0..y_{m-1}, each split as p - q
    nx_ = N - 1
    nvar = 2 * (nx_ + m)

    def xcol(j):
        return 2 * (j - 1)

    def ycol(i):
        return 2 * (nx_ + i)

    A, b = [], []
    for i in range(m):
        for j in range(N):
            # y_i - x_j <= -v_ij
            row = [0] * nvar
            row[ycol(i)] += 1
            row[ycol(i) + 1] -= 1
            if j > 0:
                row[xcol(j)] -= 1
                row[xcol(j) + 1] += 1
            A.append(row)
            b.append(-v[i][j])
    # maximize N * sum(y) - m * sum(x); objective = -(sum(v) + that maximum)
    c = [0] * nvar
    for i in range(m):
        c[ycol(i)] += N
        c[ycol(i) + 1] -= N
    for j in range(1, N):
        c[xcol(j)] -= m
        c[xcol(j) + 1] += m
    total = sum(sum(r) for r in v)
    return A, b, c, total, xcol


def oracle_fw_min(V: PointConfig) -> tuple[TorusPoint, Fraction]:
    """One minimizer of ``sum_v d(x, v)`` and the minimum, by dense simplex."""
    A, b, c, total, xcol = _fw_lp(V)
    z, best = dense_simplex_max(c, A, b)
    x = [Fraction(0)] + [z[xcol(j)] - z[xcol(j) + 1] for j in range(1, V.N)]
    return TorusPoint(x).canonical(), -total - best


def oracle_face_extremes(V: PointConfig) -> dict:
    """For each ordered pair ``(j, k)`` a minimizer maximizing ``x_j - x_k`` and that maximum."""
    A, b, c, total, xcol = _fw_lp(V)
    _, best = dense_simplex_max(c, A, b)
    # stay on the optimal face: c.z >= best
    A_face = A + [[-a for a in c]]
    b_face = b + [-best]
    N = V.N
    out = {}
    for j in range(N):
        for k in range(N):
            if j == k:
                continue
            obj = [0] * len(c)
            if j > 0:
                obj[xcol(j)] += 1
                obj[xcol(j) + 1] -= 1
            if k > 0:
                obj[xcol(k)] -= 1
                obj[xcol(k) + 1] += 1
            z, val = dense_simplex_max(obj, A_face, b_face)
            x = [Fraction(0)] + [z[xcol(i)] - z[xcol(i) + 1] for i in range(1, N)]
            out[(j, k)] = (val, TorusPoint(x).canonical())
    return out


def oracle_cell_bounds(V: PointConfig) -> list[list[Fraction]]:
    """``B[j][k] = max (x_j - x_k)`` over all minimizers, one LP per ordered pair."""
    N = V.N
    B = [[Fraction(0)] * N for _ in range(N)]
    for (j, k), (val, _) in oracle_face_extremes(V).items():
        B[j][k] = val
    return B
