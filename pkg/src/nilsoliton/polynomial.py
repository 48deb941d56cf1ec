"""Homogeneous polynomials with exact or float coefficients.

A form is a dict from exponent tuples to coefficients. Exact coefficients
(``Fraction``) stay exact under +, -, * and substitution of exact matrices.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

VAR_NAMES = "xyzuvwpqrs"


def _clean(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, Rational) and not isinstance(c, bool):
        return Fraction(int(c.numerator), int(c.denominator))
    return float(c)


class HomogeneousForm:
    __slots__ = ("num_vars", "degree", "_coeffs")

    def __init__(self, num_vars: int, degree: int, coefficients: Mapping[tuple, object] = ()):
        self.num_vars = int(num_vars)
        self.degree = int(degree)
        store: dict[tuple[int, ...], object] = {}
        for mono, c in dict(coefficients).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != self.num_vars or sum(mono) != self.degree or min(mono, default=0) < 0:
                raise ValueError(f"monomial {mono} is not of degree {self.degree} in {self.num_vars} variables")
            c = _clean(c)
            if c != 0:
                store[mono] = store.get(mono, 0) + c
        self._coeffs = {m: c for m, c in store.items() if c != 0}

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, num_vars: int, degree: int) -> "HomogeneousForm":
        return cls(num_vars, degree)

    @classmethod
    def linear(cls, coeffs: Sequence) -> "HomogeneousForm":
        n = len(coeffs)
        return cls(n, 1, {tuple(int(i == k) for i in range(n)): c for k, c in enumerate(coeffs)})

    @classmethod
    def constant(cls, num_vars: int, value) -> "HomogeneousForm":
        return cls(num_vars, 0, {(0,) * num_vars: value})

    # basic protocol ---------------------------------------------------
    @property
    def coefficients(self) -> dict[tuple[int, ...], object]:
        return dict(self._coeffs)

    def coef(self, mono: Iterable[int]):
        return self._coeffs.get(tuple(mono), 0)

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._coeffs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        if self.num_vars != other.num_vars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.num_vars, self.degree, frozenset(self._coeffs.items())))

    def _check(self, other: "HomogeneousForm"):
        if self.num_vars != other.num_vars:
            raise ValueError("forms in different numbers of variables")

    def __add__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degrees")
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0) + c
        return HomogeneousForm(self.num_vars, self.degree, out)

    def __neg__(self) -> "HomogeneousForm":
        return HomogeneousForm(self.num_vars, self.degree, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        return self + (-other)

    def __mul__(self, other) -> "HomogeneousForm":
        if not isinstance(other, HomogeneousForm):
            return HomogeneousForm(self.num_vars, self.degree,
                                   {m: c * other for m, c in self._coeffs.items()})
        self._check(other)
        out: dict[tuple[int, ...], object] = {}
        for (m1, c1), (m2, c2) in itertools.product(self._coeffs.items(), other._coeffs.items()):
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, 0) + c1 * c2
        return HomogeneousForm(self.num_vars, self.degree + other.degree, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "HomogeneousForm":
        out = HomogeneousForm.constant(self.num_vars, Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, point: Sequence):
        if len(point) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} coordinates")
        total = 0
        for m, c in self._coeffs.items():
            term = c
            for x, e in zip(point, m):
                if e:
                    term = term * x**e
            total = total + term
        return total

    # numerics ---------------------------------------------------------
    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(exponents (m, n), coefficients (m,)) as float arrays."""
        if not self._coeffs:
            return np.zeros((0, self.num_vars), dtype=int), np.zeros(0)
        monos = list(self._coeffs)
        return np.array(monos, dtype=int), np.array([float(self._coeffs[m]) for m in monos])

    def evaluate_many(self, pts: np.ndarray) -> np.ndarray:
        exps, coefs = self.as_arrays()
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if not len(coefs):
            return np.zeros(pts.shape[0])
        powers = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
        return powers @ coefs

    def derivative(self, var: int) -> "HomogeneousForm":
        if self.degree == 0:
            return HomogeneousForm.zero(self.num_vars, 0)
        out = {}
        for m, c in self._coeffs.items():
            if m[var]:
                nm = list(m)
                nm[var] -= 1
                out[tuple(nm)] = c * m[var]
        return HomogeneousForm(self.num_vars, self.degree - 1, out)

    def substitute(self, matrix: Sequence[Sequence]) -> "HomogeneousForm":
        """The form w -> f(A w)."""
        n = self.num_vars
        rows = [HomogeneousForm.linear([_clean(v) for v in row]) for row in matrix]
        if len(rows) != n:
            raise ValueError("substitution matrix has the wrong size")
        out = HomogeneousForm.zero(len(matrix[0]), self.degree)
        for m, c in self._coeffs.items():
            term = HomogeneousForm.constant(len(matrix[0]), c)
            for r, e in zip(rows, m):
                term = term * r**e
            out = out + term
        return out

    def norm(self) -> float:
        return math.sqrt(sum(float(c) ** 2 for c in self._coeffs.values()))

    def proportional_to(self, other: "HomogeneousForm", tol: float = 0.0) -> bool:
        """True if self = s * other for some nonzero scalar s."""
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.num_vars != other.num_vars or self.degree != other.degree:
            return False
        ref = max(other._coeffs, key=lambda m: abs(float(other._coeffs[m])))
        if ref not in self._coeffs:
            return False
        s = self._coeffs[ref] / other._coeffs[ref]
        keys = set(self._coeffs) | set(other._coeffs)
        if tol == 0.0:
            return all(self.coef(m) == s * other.coef(m) for m in keys)
        scale = max(abs(float(c)) for c in self._coeffs.values())
        return all(abs(float(self.coef(m) - s * other.coef(m))) <= tol * scale for m in keys)

    def __repr__(self) -> str:
        return f"HomogeneousForm({self.num_vars}, {self.degree}, {self._coeffs!r})"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        names = VAR_NAMES if self.num_vars <= len(VAR_NAMES) else None
        parts = []
        for m in sorted(self._coeffs, reverse=True):
            c = self._coeffs[m]
            var = []
            for idx, e in enumerate(m):
                if e:
                    name = names[idx] if names else f"w{idx + 1}"
                    var.append(name if e == 1 else f"{name}^{e}")
            mono = "*".join(var)
            neg = c < 0
            mag = -c if neg else c
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            sign = "-" if neg else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text
