"""Weights of a bracket, their Gram matrix and the stratum datum beta.

Each support term (i, j, k) has weight alpha = E_kk - E_ii - E_jj (stored as
its diagonal). ``beta`` is the minimal-norm point of the convex hull of the
support weights; any convex solution c of ``U c = nu [1]`` gives
``beta = sum c_p alpha_p`` and ``nu = |beta|^2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact, lp
from .algebra_core import Bracket, Triple
from .curvature import ricci

PAYNE_TOL = 1e-10
MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class WeightSystem:
    order: tuple[Triple, ...]
    weights: tuple[tuple[int, ...], ...]
    gram: tuple[tuple[int, ...], ...]
    ordering: str = "declared"

    def gram_array(self) -> np.ndarray:
        return np.array(self.gram, dtype=int)

    def weight_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)


def weight(i: int, j: int, k: int, n: int) -> tuple[int, ...]:
    w = [0] * n
    w[k - 1] += 1
    w[i - 1] -= 1
    w[j - 1] -= 1
    return tuple(w)


def weights(mu: Bracket, ordering: str = "lex") -> WeightSystem:
    if mu.is_zero():
        raise ValueError("the zero bracket has no weights")
    order = tuple(mu.support(ordering))
    ws = tuple(weight(i, j, k, mu.dim) for i, j, k in order)
    gram = tuple(tuple(sum(a * b for a, b in zip(p, q)) for q in ws) for p in ws)
    return WeightSystem(order, ws, gram, ordering)


def squares(mu: Bracket, ws: WeightSystem) -> list:
    terms = mu.terms
    return [terms[key] * terms[key] for key in ws.order]


@dataclass(frozen=True)
class PayneResult:
    holds: bool
    nu: float
    deviation: float
    lhs: tuple


def payne_check(mu: Bracket, tol: float = PAYNE_TOL, ordering: str = "lex") -> PayneResult:
    """Whether U [(mu_ij^k)^2] is a constant vector nu [1].

    Requires a diagonal Ricci operator.
    """
    ric = ricci(mu)
    off = ric - np.diag(np.diag(ric))
    if np.abs(off).max(initial=0.0) > tol:
        raise ValueError("Ricci operator is not diagonal")
    ws = weights(mu, ordering)
    v = squares(mu, ws)
    lhs = tuple(sum((u * x for u, x in zip(row, v)), 0) for row in ws.gram)
    vals = [float(x) for x in lhs]
    nu = sum(vals) / len(vals)
    dev = max(abs(x - vals[0]) for x in vals)
    return PayneResult(dev <= tol, nu, dev, lhs)


@dataclass(frozen=True)
class EinsteinSystem:
    """Solutions of U c = nu [1], sum c = 1.

    ``particular`` is the minimal-norm solution and ``null_basis`` spans the
    remaining directions; ``convex_solution`` is a nonnegative solution when
    one exists.
    """

    particular: tuple[Fraction, ...]
    null_basis: tuple[tuple[Fraction, ...], ...]
    nu: Fraction
    convex_solution: tuple[Fraction, ...] | None


def einstein_system(ws: WeightSystem) -> EinsteinSystem:
    u = [list(row) for row in ws.gram]
    m = len(u)
    a = [row + [-1] for row in u] + [[1] * m + [0]]
    b = [0] * m + [1]
    sol = _exact.solve(a, b)
    if sol is None:  # cannot happen for a Gram matrix, kept for safety
        return EinsteinSystem((), (), Fraction(0), None)
    null = [v[:m] for v in _exact.nullspace(a, m + 1)]
    c = sol[:m]
    nu = sol[m]
    if null:
        # project onto the orthogonal complement of the null directions
        gram_n = [[_exact.dot(p, q) for q in null] for p in null]
        z = _exact.solve(gram_n, [_exact.dot(p, c) for p in null])
        c = [ci - sum(zk * p[i] for zk, p in zip(z, null)) for i, ci in enumerate(c)]
    convex = _convex_point(c, null)
    return EinsteinSystem(tuple(c), tuple(tuple(v) for v in null), nu,
                          None if convex is None else tuple(convex))


def _convex_point(c0: list[Fraction], null: list[list[Fraction]]) -> list[Fraction] | None:
    if all(v >= 0 for v in c0):
        return c0
    d = len(null)
    if d == 0:
        return None
    m = len(c0)
    # c0 + N y >= 0  <=>  -N y <= c0
    g = [[-null[k][i] for k in range(d)] for i in range(m)]
    if d <= 3:
        vertices = []
        for rows in itertools.combinations(range(m), d):
            sub = [g[r] for r in rows]
            if _exact.rank(sub) < d:
                continue
            y = _exact.solve(sub, [c0[r] for r in rows])
            if y is not None and all(_exact.dot(g[i], y) <= c0[i] for i in range(m)):
                vertices.append(y)
        if not vertices:
            return None
        y = [sum(v[k] for v in vertices) / len(vertices) for k in range(d)]
    else:
        y = lp.feasible_point(g, c0)
        if y is None:
            return None
    return [c0[i] + sum(null[k][i] * y[k] for k in range(d)) for i in range(m)]


@dataclass(frozen=True)
class MinNormPoint:
    beta: np.ndarray
    coefficients: np.ndarray
    iterations: int

    @property
    def nu(self) -> float:
        return float(self.beta @ self.beta)


def _affine_minimizer(pts: np.ndarray) -> np.ndarray:
    """Weights w (sum 1) of the minimal-norm point of the affine hull."""
    k = pts.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = pts @ pts.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    return np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]


def min_norm_point(points: Sequence[Sequence[float]], tol: float = 1e-12,
                   max_iter: int = 1000) -> MinNormPoint:
    """Wolfe's algorithm for the nearest point to the origin in conv(points)."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[0] == 0:
        raise ValueError("need a nonempty list of points")
    m = p.shape[0]
    scale = max(1.0, float((p * p).sum(axis=1).max()))
    first = int(np.argmin((p * p).sum(axis=1)))
    corral = [first]
    lam = np.array([1.0])
    x = p[first].copy()
    it = 0
    for it in range(1, max_iter + 1):
        dots = p @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in corral:
            break
        corral.append(j)
        lam = np.append(lam, 0.0)
        while True:
            w = _affine_minimizer(p[corral])
            if np.all(w > tol):
                lam = w
                break
            mask = w <= tol
            denom = lam[mask] - w[mask]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, lam[mask] / denom, np.inf)
            theta = min(1.0, float(ratios.min()))
            lam = (1 - theta) * lam + theta * w
            keep = lam > tol
            if keep.all():
                keep[int(np.argmin(lam))] = False
            corral = [c for c, k in zip(corral, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ p[corral]
    coef = np.zeros(m)
    coef[corral] = lam
    return MinNormPoint(lam @ p[corral], coef, it)


def min_norm_point_bruteforce(points: Sequence[Sequence[float]], tol: float = 1e-10) -> np.ndarray:
    """Minimal-norm point by enumerating every subset's affine minimizer.

    Exponential in the number of points; meant as an independent check.
    """
    p = np.asarray(points, dtype=float)
    best = None
    for size in range(1, p.shape[0] + 1):
        for subset in itertools.combinations(range(p.shape[0]), size):
            sub = p[list(subset)]
            w = _affine_minimizer(sub)
            if abs(w.sum() - 1) > 1e-9 or (w < -tol).any():
                continue
            x = w @ sub
            if best is None or x @ x < best @ best:
                best = x
    return best


@dataclass(frozen=True)
class EigenvalueType:
    eigenvalues: tuple[int, ...]
    multiplicities: tuple[int, ...]

    def __str__(self) -> str:
        ks = "<".join(str(k) for k in self.eigenvalues)
        ds = ",".join(str(d) for d in self.multiplicities)
        return f"({ks};{ds})"


NON_INTEGRAL = "non-integral"


def eigenvalue_type(beta: Sequence, tol: float = 1e-9) -> EigenvalueType | str:
    """Integer pattern of beta + |beta|^2 I, sorted ascending and grouped."""
    if _exact.is_exact(beta):
        vals = [Fraction(b) for b in beta]
        nb = sum(v * v for v in vals)
        entries = sorted(v + nb for v in vals)
    else:
        arr = np.asarray(beta, dtype=float)
        nb = float(arr @ arr)
        fl = sorted(float(v) + nb for v in arr)
        entries = []
        for v in fl:
            q = Fraction(v).limit_denominator(MAX_DENOMINATOR)
            if abs(float(q) - v) > tol * max(1.0, abs(v)):
                return NON_INTEGRAL
            entries.append(q)
    if not entries or any(v <= 0 for v in entries):
        return NON_INTEGRAL
    den = math.lcm(*(v.denominator for v in entries))
    ints = [int(v * den) for v in entries]
    g = math.gcd(*ints)
    ints = [v // g for v in ints]
    ks, ds = [], []
    for v in ints:
        if ks and ks[-1] == v:
            ds[-1] += 1
        else:
            ks.append(v)
            ds.append(1)
    return EigenvalueType(tuple(ks), tuple(ds))
