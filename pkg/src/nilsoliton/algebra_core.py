"""Skew-symmetric brackets on R^n given by structure constants.

A bracket is stored sparsely as ``(i, j, k) -> c`` with ``i < j`` and 1-based
indices, meaning ``mu(e_i, e_j) = c e_k + ...``. Coefficients are kept exact
(``Fraction``) when they arrive exact and as floats otherwise.

Group elements act by ``(g.mu)(X, Y) = g mu(g^-1 X, g^-1 Y)`` and diagonal
matrices act infinitesimally on the basis term ``(i, j, k)`` by the scalar
``a_k - a_i - a_j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _exact

Triple = tuple[int, int, int]

DEFAULT_TOL = 1e-10


def _normalize_coef(c):
    if isinstance(c, bool):
        raise TypeError("boolean coefficient")
    if isinstance(c, Fraction):
        return c
    if isinstance(c, Rational):
        return Fraction(int(c.numerator), int(c.denominator))
    return float(c)


class Bracket:
    """Immutable sparse bracket on R^dim.

    ``terms`` may be a mapping or an iterable of ``((i, j, k), c)`` pairs.
    Pairs with ``i > j`` are flipped with a sign change; zero coefficients are
    dropped. Insertion order is remembered (the *declared* ordering) but does
    not take part in equality.
    """

    __slots__ = ("_dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Triple, object] | Iterable = ()):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {dim!r}")
        self._dim = int(dim)
        items = terms.items() if isinstance(terms, Mapping) else terms
        store: dict[Triple, object] = {}
        for key, c in items:
            i, j, k = (int(v) for v in key)
            for idx in (i, j, k):
                if not 1 <= idx <= self._dim:
                    raise ValueError(f"index {idx} out of range 1..{self._dim}")
            if i == j:
                raise ValueError(f"bracket of e{i} with itself must vanish")
            c = _normalize_coef(c)
            if i > j:
                i, j, c = j, i, -c
            if (i, j, k) in store:
                raise ValueError(f"duplicate term ({i},{j},{k})")
            if c != 0:
                store[(i, j, k)] = c
        self._terms = store
        self._hash = None

    @classmethod
    def zero(cls, dim: int) -> "Bracket":
        return cls(dim)

    @classmethod
    def from_array(cls, arr: np.ndarray, threshold: float = 0.0) -> "Bracket":
        """Build from a dense (n, n, n) array ``arr[i, j, k] = <mu(e_i, e_j), e_k>``.

        Only the ``i < j`` half is read. Entries with ``|c| <= threshold`` are
        dropped (exact zeros always are).
        """
        arr = np.asarray(arr)
        n = arr.shape[0]
        terms = []
        for i, j in itertools.combinations(range(n), 2):
            for k in range(n):
                c = arr[i, j, k]
                if c != 0 and abs(c) > threshold:
                    terms.append(((i + 1, j + 1, k + 1), float(c)))
        return cls(n, terms)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> dict[Triple, object]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Triple, object]]:
        return iter(self._terms.items())

    def support(self, ordering: str = "declared") -> list[Triple]:
        if ordering == "declared":
            return list(self._terms)
        if ordering == "lex":
            return sorted(self._terms)
        raise ValueError(f"unknown ordering {ordering!r}")

    def coef(self, i: int, j: int, k: int):
        """Structure constant <mu(e_i, e_j), e_k> for any i, j."""
        if i == j:
            return 0
        if i < j:
            return self._terms.get((i, j, k), 0)
        return -self._terms.get((j, i, k), 0)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def to_array(self) -> np.ndarray:
        """Dense float array C[i, j, k] (0-based), antisymmetric in i, j."""
        n = self._dim
        arr = np.zeros((n, n, n))
        for (i, j, k), c in self._terms.items():
            arr[i - 1, j - 1, k - 1] = float(c)
            arr[j - 1, i - 1, k - 1] = -float(c)
        return arr

    def scaled(self, s) -> "Bracket":
        return Bracket(self._dim, [(key, s * c) for key, c in self._terms.items()])

    def as_float(self) -> "Bracket":
        return Bracket(self._dim, [(key, float(c)) for key, c in self._terms.items()])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bracket):
            return NotImplemented
        return self._dim == other._dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dim, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{key}: {c}" for key, c in self._terms.items())
        return f"Bracket({self._dim}, {{{body}}})"

    def allclose(self, other: "Bracket", tol: float = DEFAULT_TOL) -> bool:
        """Coefficientwise agreement to ``tol`` times max(1, largest coefficient)."""
        if self._dim != other._dim:
            return False
        keys = set(self._terms) | set(other._terms)
        scale = max([1.0] + [abs(float(c)) for c in (*self._terms.values(), *other._terms.values())])
        return all(
            abs(float(self._terms.get(key, 0)) - float(other._terms.get(key, 0))) <= tol * scale
            for key in keys
        )


def evaluate(mu: Bracket, x: Sequence, y: Sequence) -> np.ndarray:
    """mu(x, y) for coordinate vectors x, y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (mu.dim,) or y.shape != (mu.dim,):
        raise ValueError(f"vectors must have length {mu.dim}")
    out = np.zeros(mu.dim)
    for (i, j, k), c in mu.items():
        out[k - 1] += float(c) * (x[i - 1] * y[j - 1] - x[j - 1] * y[i - 1])
    return out


def _exact_product(mu: Bracket, x: Mapping[int, Fraction], y: Mapping[int, Fraction]):
    """mu(x, y) on sparse exact vectors {index: value}."""
    out: dict[int, Fraction] = {}
    for (i, j, k), c in mu.items():
        v = x.get(i, 0) * y.get(j, 0) - x.get(j, 0) * y.get(i, 0)
        if v:
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v != 0}


def act(g, mu: Bracket, threshold: float = 0.0) -> Bracket:
    """The bracket g.mu(X, Y) = g mu(g^-1 X, g^-1 Y).

    The action is computed exactly when g and mu are both exact. Float results
    keep every coefficient above ``threshold`` (default: only exact zeros are
    dropped).
    """
    n = mu.dim
    if _exact.is_exact(g) and mu.is_exact:
        gm = _exact.fmatrix(g)
        if len(gm) != n or any(len(r) != n for r in gm):
            raise ValueError(f"transform must be {n}x{n}")
        try:
            h = _exact.inverse(gm)
        except ValueError:
            raise ValueError("transform is singular") from None
        out = []
        for i, j in itertools.combinations(range(n), 2):
            new = [Fraction(0)] * n
            for (a, b, c), v in mu.items():
                w = h[a - 1][i] * h[b - 1][j] - h[b - 1][i] * h[a - 1][j]
                if w:
                    for k in range(n):
                        if gm[k][c - 1]:
                            new[k] += v * w * gm[k][c - 1]
            out.extend(((i + 1, j + 1, k + 1), val) for k, val in enumerate(new) if val)
        return Bracket(n, out)
    gm = np.asarray(g, dtype=float)
    if gm.shape != (n, n):
        raise ValueError(f"transform must be {n}x{n}")
    if abs(np.linalg.det(gm)) == 0.0:
        raise ValueError("transform is singular")
    h = np.linalg.inv(gm)
    arr = np.einsum("kc,ai,bj,abc->ijk", gm, h, h, mu.to_array(), optimize=True)
    return Bracket.from_array(arr, threshold=threshold)


def act_infinitesimal(alpha: Sequence, mu: Bracket) -> Bracket:
    """pi(alpha) mu for a diagonal alpha given by its diagonal entries."""
    a = list(alpha)
    if len(a) != mu.dim:
        raise ValueError(f"diagonal must have length {mu.dim}")
    return Bracket(mu.dim, [((i, j, k), (a[k - 1] - a[i - 1] - a[j - 1]) * c)
                            for (i, j, k), c in mu.items()])


def derivation_defect(mu: Bracket, d) -> np.ndarray:
    """Array E[i, j, :] = D mu(e_i, e_j) - mu(D e_i, e_j) - mu(e_i, D e_j)."""
    d = np.asarray(d, dtype=float)
    n = mu.dim
    if d.shape != (n, n):
        raise ValueError(f"D must be {n}x{n}")
    return derivation_defect_array(mu.to_array(), d)


def derivation_defect_array(c: np.ndarray, d: np.ndarray) -> np.ndarray:
    return (np.einsum("kl,ijl->ijk", d, c)
            - np.einsum("li,ljk->ijk", d, c)
            - np.einsum("lj,ilk->ijk", d, c))


def derivation_residual(mu: Bracket, d) -> float:
    """Largest Euclidean norm of the derivation defect over basis pairs."""
    if mu.dim < 2:
        return 0.0
    return float(np.linalg.norm(derivation_defect(mu, d), axis=2).max())


def is_derivation(mu: Bracket, d, tol: float = DEFAULT_TOL) -> bool:
    return derivation_residual(mu, d) <= tol


def inner(mu: Bracket, lam: Bracket):
    """<mu, lam> summed over ordered pairs, so each stored term counts twice."""
    if mu.dim != lam.dim:
        raise ValueError("brackets live on different spaces")
    other = lam.terms
    return 2 * sum((c * other[key] for key, c in mu.items() if key in other), 0)


def norm2(mu: Bracket):
    return inner(mu, mu)


@dataclass(frozen=True)
class Validation:
    jacobi_ok: bool
    nilpotent: bool
    step: int | None = None
    jacobi_residual: float = 0.0


def _basis_span_rank(vectors: list[dict[int, object]], n: int, exact: bool, tol: float):
    rows = [[v.get(k + 1, 0) for k in range(n)] for v in vectors]
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        return [], 0
    if exact:
        m, piv = _exact.rref(rows)
        basis = [dict((k + 1, x) for k, x in enumerate(m[r]) if x != 0) for r in range(len(piv))]
        return basis, len(piv)
    a = np.array(rows, dtype=float)
    u, s, vt = np.linalg.svd(a)
    r = int((s > tol * max(1.0, s[0])).sum())
    basis = [dict((k + 1, x) for k, x in enumerate(vt[i])) for i in range(r)]
    return basis, r


def validate(mu: Bracket, tol: float = DEFAULT_TOL) -> Validation:
    """Jacobi identity on all basis triples, nilpotency and step.

    The step is the length of the lower central series; the zero bracket has
    step 1. Exact brackets are checked exactly, float ones against ``tol``
    times max(1, largest coefficient)^2.
    """
    n = mu.dim
    exact = mu.is_exact
    scale = max([1.0] + [abs(float(c)) for _, c in mu.items()]) ** 2
    basis = [{i: Fraction(1)} for i in range(1, n + 1)]
    worst = 0.0
    jacobi_ok = True
    for x, y, z in itertools.combinations(range(n), 3):
        ex, ey, ez = basis[x], basis[y], basis[z]
        acc: dict[int, object] = {}
        for p, q, r in ((ex, ey, ez), (ey, ez, ex), (ez, ex, ey)):
            for k, v in _exact_product(mu, _exact_product(mu, p, q), r).items():
                acc[k] = acc.get(k, 0) + v
        size = max((abs(float(v)) for v in acc.values()), default=0.0)
        worst = max(worst, size)
        if exact:
            if any(v != 0 for v in acc.values()):
                jacobi_ok = False
        elif size > tol * scale:
            jacobi_ok = False

    current, dim_now = _basis_span_rank(basis, n, True, tol)
    step = 0
    while dim_now > 0:
        step += 1
        if step > n:
            return Validation(jacobi_ok, False, None, worst)
        products = [_exact_product(mu, b, v) for b in basis for v in current]
        nxt, dim_next = _basis_span_rank(products, n, exact, tol)
        if dim_next == dim_now:
            return Validation(jacobi_ok, False, None, worst)
        current, dim_now = nxt, dim_next
    return Validation(jacobi_ok, True, max(step, 1), worst)
