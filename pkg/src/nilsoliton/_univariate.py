"""Exact univariate polynomials (coefficient lists, lowest degree first)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

Poly = list[Fraction]


def trim(p: Sequence) -> Poly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: Sequence) -> int:
    return len(trim(p)) - 1


def deriv(p: Sequence) -> Poly:
    return trim([i * c for i, c in enumerate(p)][1:])


def divmod_poly(a: Sequence, b: Sequence) -> tuple[Poly, Poly]:
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] -= f * c
        r = trim(r)
    return trim(q), r


def monic(p: Sequence) -> Poly:
    p = trim(p)
    return [c / p[-1] for c in p] if p else p


def gcd(a: Sequence, b: Sequence) -> Poly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def squarefree(p: Sequence) -> Poly:
    p = trim(p)
    if len(p) <= 2:
        return monic(p)
    return monic(divmod_poly(p, gcd(p, deriv(p)))[0])


def horner(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def interpolate(xs: Sequence, ys: Sequence) -> Poly:
    """Exact Newton interpolation through (xs, ys)."""
    xs = [Fraction(x) for x in xs]
    coef = [Fraction(y) for y in ys]
    n = len(xs)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly: Poly = [Fraction(0)]
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        shifted = [Fraction(0)] + poly
        for k in range(len(poly)):
            shifted[k] -= xs[i] * poly[k]
        shifted[0] += coef[i]
        poly = shifted
    return trim(poly)


def real_roots(p: Sequence, imag_tol: float = 1e-8) -> list[float]:
    """Real roots of a squarefree polynomial via its companion matrix.

    Roots are polished with a few Newton steps on the exact coefficients.
    """
    p = trim(p)
    if len(p) <= 1:
        return []
    fp = [float(c) for c in p]
    scale = max(abs(c) for c in fp)
    roots = np.roots([c / scale for c in reversed(fp)])
    dp = deriv(p)
    out = []
    for r in roots:
        if abs(r.imag) > imag_tol * max(1.0, abs(r)):
            continue
        x = float(r.real)
        for _ in range(8):
            d = float(horner(dp, x))
            if d == 0:
                break
            step = float(horner(p, x)) / d
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        out.append(x)
    return sorted(out)


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-preserving elimination."""
    a = [[Fraction(v) for v in row] for row in m]
    n = len(a)
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        result *= a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return result


def sylvester(p: Sequence, q: Sequence, deg_p: int, deg_q: int) -> list[list]:
    """Sylvester matrix of p, q with formal degrees (coefficients lowest first)."""
    p = list(p) + [0] * (deg_p + 1 - len(p))
    q = list(q) + [0] * (deg_q + 1 - len(q))
    size = deg_p + deg_q
    rows = []
    for i in range(deg_q):
        row = [0] * size
        for k, c in enumerate(reversed(p[: deg_p + 1])):
            row[i + k] = c
        rows.append(row)
    for i in range(deg_p):
        row = [0] * size
        for k, c in enumerate(reversed(q[: deg_q + 1])):
            row[i + k] = c
        rows.append(row)
    return rows
