"""Small exact linear algebra over the rationals.

Matrices are lists of rows. Entries may be ``int`` or ``Fraction``; every
routine returns ``Fraction`` entries. Sizes in this package never exceed a
few dozen rows, so plain Gauss-Jordan elimination is adequate.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

Matrix = list[list[Fraction]]


def is_exact(x) -> bool:
    """True for ints/Fractions and (nested) sequences made only of them."""
    if isinstance(x, bool):
        return True
    if isinstance(x, Rational):
        return True
    if isinstance(x, (str, bytes)):
        return False
    try:
        return all(is_exact(v) for v in x)
    except TypeError:
        return False


def to_fraction(x) -> Fraction:
    """Exact conversion; floats are converted to their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(float(x))


def fmatrix(rows: Iterable[Iterable]) -> Matrix:
    return [[to_fraction(v) for v in row] for row in rows]


def rref(a: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = fmatrix(a)
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return m, pivots


def rank(a: Sequence[Sequence]) -> int:
    if not a:
        return 0
    return len(rref(a)[1])


def nullspace(a: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    """Basis of {x : a x = 0} as a list of column vectors."""
    if ncols is None:
        ncols = len(a[0])
    if not a:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in enumerate(pivots):
            v[p] = -m[row][f]
        basis.append(v)
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One solution of ``a x = b`` (free variables set to zero), or None."""
    ncols = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    m, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in enumerate(pivots):
        x[p] = m[row][ncols]
    return x


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in m]


def matvec(a: Sequence[Sequence], x: Sequence) -> list:
    return [sum((aij * xj for aij, xj in zip(row, x)), Fraction(0)) for row in a]


def dot(x: Sequence, y: Sequence):
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]
