"""Exact phase-one simplex for small dense feasibility problems.

All arithmetic is over ``Fraction`` with Bland's anti-cycling rule, so the
answers (feasible point or Farkas certificate) are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ._exact import fmatrix, to_fraction


def feasible_standard(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """A point x >= 0 with a x = b, or None when no such point exists."""
    rows = fmatrix(a)
    rhs = [to_fraction(v) for v in b]
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    # tableau columns: n originals, m artificials, rhs
    tab = [rows[i] + [Fraction(int(i == r)) for r in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    ncols = n + m
    # reduced costs of "minimize sum of artificials"
    cost = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            cost[j] -= tab[i][j]
    for i in range(m):
        cost[n + i] += 1

    while True:
        enter = next((j for j in range(ncols) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # cannot happen: phase one is bounded below by 0
            break
        r = best[1]
        piv = tab[r][enter]
        tab[r] = [v / piv for v in tab[r]]
        for i in range(m):
            if i != r and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [vi - f * vr for vi, vr in zip(tab[i], tab[r])]
        f = cost[enter]
        cost = [ci - f * vr for ci, vr in zip(cost, tab[r])]
        basis[r] = enter

    if -cost[-1] != 0:
        return None
    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tab[i][-1]
    return x


def feasible_point(g: Sequence[Sequence], h: Sequence) -> list[Fraction] | None:
    """A point y (free sign) with g y <= h, or None."""
    gm = fmatrix(g)
    if not gm:
        return []
    k = len(gm[0])
    m = len(gm)
    a = [row + [-v for v in row] + [Fraction(int(i == r)) for r in range(m)]
         for i, row in enumerate(gm)]
    x = feasible_standard(a, h)
    if x is None:
        return None
    return [x[i] - x[k + i] for i in range(k)]


def farkas_certificate(g: Sequence[Sequence], h: Sequence) -> list[Fraction] | None:
    """u >= 0 with g^T u = 0 and h^T u = -1, proving {g y <= h} empty."""
    gm = fmatrix(g)
    if not gm:
        return None
    k = len(gm[0])
    a = [[gm[i][j] for i in range(len(gm))] for j in range(k)]
    a.append([to_fraction(v) for v in h])
    b = [0] * k + [-1]
    return feasible_standard(a, b)
