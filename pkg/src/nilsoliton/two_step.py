"""Invariants of 2-step nilpotent brackets of type (n1, n2).

For w in the center z, J(w) is the skew map of v defined by
<J(w) v1, v2> = <mu(v1, v2), w>. Its Pfaffian is a form of degree n1/2 in
n2 variables, and w -> tr J(w)^p is an O(n1) x O(n2) invariant.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.stats import norm as _normal
from scipy.stats import qmc

from . import _univariate as up
from ._exact import to_fraction
from .algebra_core import Bracket, validate
from .polynomial import HomogeneousForm


@dataclass(frozen=True)
class TwoStepSplit:
    v_indices: tuple[int, ...]
    z_indices: tuple[int, ...]

    @property
    def type(self) -> tuple[int, int]:
        return len(self.v_indices), len(self.z_indices)


def split(mu: Bracket) -> TwoStepSplit:
    """Split the canonical basis into v (generators) and z (derived algebra)."""
    v = validate(mu)
    if not (v.jacobi_ok and v.nilpotent and v.step == 2):
        raise ValueError("bracket is not 2-step nilpotent")
    z = sorted({k for (_, _, k) in mu.support()})
    zset = set(z)
    if any(i in zset or j in zset for (i, j, _) in mu.support()):
        raise ValueError("canonical basis does not split the bracket")
    # derived algebra must be spanned by the e_k themselves
    pairs = sorted({(i, j) for (i, j, _) in mu.support()})
    rows = [[mu.coef(i, j, k) for k in z] for (i, j) in pairs]
    from ._exact import rank
    if mu.is_exact:
        r = rank(rows)
    else:
        r = int(np.linalg.matrix_rank(np.array(rows, dtype=float)))
    if r != len(z):
        raise ValueError("canonical basis does not split the bracket")
    vv = tuple(i for i in range(1, mu.dim + 1) if i not in zset)
    return TwoStepSplit(vv, tuple(z))


def j_components(mu: Bracket, sp: TwoStepSplit | None = None) -> list[list[list]]:
    """Matrices J_k = J(e_k) for k in z, entries exact when mu is."""
    sp = sp or split(mu)
    pos = {idx: p for p, idx in enumerate(sp.v_indices)}
    n1 = len(sp.v_indices)
    mats = []
    for k in sp.z_indices:
        m = [[0] * n1 for _ in range(n1)]
        for (i, j, kk), c in mu.items():
            if kk == k:
                a, b = pos[i], pos[j]
                # <J e_a, e_b> = <mu(e_a, e_b), e_k> sits in row b, column a
                m[b][a] = c
                m[a][b] = -c
        mats.append(m)
    return mats


def j_map(mu: Bracket, w, sp: TwoStepSplit | None = None) -> np.ndarray:
    sp = sp or split(mu)
    w = np.asarray(w, dtype=float)
    if w.shape != (len(sp.z_indices),):
        raise ValueError(f"w must have {len(sp.z_indices)} coordinates")
    comps = np.array(j_components(mu, sp), dtype=float)
    return np.einsum("k,kab->ab", w, comps)


def _pfaffian(entries) -> object:
    """Pfaffian of a skew matrix whose entries support + and *."""
    n = len(entries)

    @lru_cache(maxsize=None)
    def pf(idx: tuple[int, ...]):
        if not idx:
            return 1
        first, rest = idx[0], idx[1:]
        total = None
        for pos, j in enumerate(rest):
            a = entries[first][j]
            if _is_zero(a):
                continue
            sub = pf(rest[:pos] + rest[pos + 1:])
            if _is_zero(sub):
                continue
            term = a * sub if pos % 2 == 0 else -(a * sub)
            total = term if total is None else total + term
        return 0 if total is None else total

    if n % 2:
        return 0
    return pf(tuple(range(n)))


def _is_zero(x) -> bool:
    if isinstance(x, HomogeneousForm):
        return x.is_zero()
    return x == 0


def pfaffian(matrix) -> float:
    """Numeric Pfaffian, convention Pf([[0, 1], [-1, 0]]) = 1."""
    m = [list(row) for row in np.asarray(matrix)]
    return _pfaffian(m)


def pfaffian_form(mu: Bracket) -> HomogeneousForm:
    """w -> Pf(J(w)) as a form of degree n1/2 in the n2 center coordinates."""
    sp = split(mu)
    n1, n2 = sp.type
    if n1 % 2:
        raise ValueError("Pfaffian form needs an even-dimensional v")
    comps = j_components(mu, sp)
    entries = [[HomogeneousForm.linear([comps[k][a][b] for k in range(n2)])
                for b in range(n1)] for a in range(n1)]
    result = _pfaffian(entries)
    if isinstance(result, HomogeneousForm):
        return result
    return HomogeneousForm.zero(n2, n1 // 2)


def trace_power_form(mu: Bracket, p: int) -> HomogeneousForm:
    """The polynomial w -> tr(J(w)^p), built from traces of products of J_k."""
    if p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    sp = split(mu)
    n2 = len(sp.z_indices)
    comps = j_components(mu, sp)
    if mu.is_exact:
        mats = [[[to_fraction(x) for x in row] for row in m] for m in comps]
        mul = _matmul_exact
        trace = lambda m: sum((m[i][i] for i in range(len(m))), Fraction(0))  # noqa: E731
    else:
        mats = [np.array(m, dtype=float) for m in comps]
        mul = np.matmul
        trace = lambda m: float(np.trace(m))  # noqa: E731
    coeffs: dict[tuple[int, ...], object] = {}
    for word in itertools.product(range(n2), repeat=p):
        prod = mats[word[0]]
        for k in word[1:]:
            prod = mul(prod, mats[k])
        t = trace(prod)
        if t != 0:
            counts = Counter(word)
            mono = tuple(counts.get(k, 0) for k in range(n2))
            coeffs[mono] = coeffs.get(mono, 0) + t
    return HomogeneousForm(n2, p, coeffs)


def _matmul_exact(a, b):
    n = len(a)
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(a[i], cols[j])), Fraction(0)) for j in range(n)]
            for i in range(n)]


# -- sphere maxima ------------------------------------------------------------


@dataclass(frozen=True)
class SphereMax:
    max: float
    argmax: np.ndarray
    seed: int
    certified: bool
    sweep_max: float


def _sphere_points(n: int, count: int, seed: int) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    g = _normal.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_max(f: HomogeneousForm, seed: int = 0, starts: int = 64,
               sweep: int = 10_000, iters: int = 300) -> SphereMax:
    """Maximum of a form on the unit sphere.

    Multi-start projected gradient ascent, Newton refinement of the Lagrange
    conditions, then a quasi-random sweep that must not beat the answer by
    more than 1e-6.
    """
    n = f.num_vars
    if n < 1:
        raise ValueError("form has no variables")
    if n == 1:
        vals = [float(f([1.0])), float(f([-1.0]))]
        best = int(np.argmax(vals))
        return SphereMax(vals[best], np.array([1.0 if best == 0 else -1.0]), seed, True, max(vals))

    grads = [f.derivative(i) for i in range(n)]
    hess = [[g.derivative(j) for j in range(n)] for g in grads]

    def value(x):
        return f.evaluate_many(x)

    def gradient(x):
        return np.stack([g.evaluate_many(x) for g in grads], axis=1)

    x = _sphere_points(n, starts, seed)
    x = _ascend(x, value, gradient, iters)
    x = np.array([_newton(xi, f, grads, hess) for xi in x])
    vals = value(x)
    best = int(np.argmax(vals))
    m, arg = float(vals[best]), x[best]

    probe = _sphere_points(n, sweep, seed + 1)
    pv = value(probe)
    sweep_max = float(pv.max())
    if sweep_max > m + 1e-6:
        y = _ascend(probe[[int(np.argmax(pv))]], value, gradient, iters)
        y = _newton(y[0], f, grads, hess)
        fy = float(value(y[None, :])[0])
        if fy > m:
            m, arg = fy, y
    return SphereMax(m, arg, seed, sweep_max <= m + 1e-6, sweep_max)


def _ascend(x, value, gradient, iters):
    x = x.copy()
    fx = value(x)
    eta = np.full(x.shape[0], 0.5)
    for _ in range(iters):
        g = gradient(x)
        tangent = g - (g * x).sum(axis=1, keepdims=True) * x
        trial = x + eta[:, None] * tangent
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        ft = value(trial)
        better = ft >= fx
        x[better] = trial[better]
        fx[better] = ft[better]
        eta = np.where(better, eta * 1.5, eta * 0.5)
        if (np.linalg.norm(tangent, axis=1) < 1e-10).all():
            break
    return x


def _newton(x, f, grads, hess, steps: int = 20):
    n = len(x)
    fx = float(f(list(x)))
    g = np.array([float(gi(list(x))) for gi in grads])
    lam = float(x @ g) / 2
    for _ in range(steps):
        g = np.array([float(gi(list(x))) for gi in grads])
        h = np.array([[float(hij(list(x))) for hij in row] for row in hess])
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = h - 2 * lam * np.eye(n)
        jac[:n, n] = -2 * x
        jac[n, :n] = 2 * x
        rhs = -np.concatenate([g - 2 * lam * x, [x @ x - 1]])
        if np.linalg.norm(rhs) < 1e-15:
            break
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            break
        xn = x + step[:n]
        xn /= np.linalg.norm(xn)
        fn = float(f(list(xn)))
        if fn < fx - 1e-12:
            break
        x, fx, lam = xn, fn, lam + step[n]
        if np.linalg.norm(step[:n]) < 1e-15:
            break
    return x


# -- real linear factors of ternary forms -----------------------------------


@dataclass(frozen=True)
class LinearFactor:
    coeffs: tuple[float, float, float]
    residual: float

    def __str__(self) -> str:
        return str(HomogeneousForm.linear(list(self.coeffs)))


_COMBOS = [
    ((1, 2, 3, 5, 7, 11, 13), (3, -1, 4, -2, 5, -7, 2)),
    ((2, -3, 1, 4, -1, 3, 5), (1, 1, -2, 3, 7, -4, -3)),
    ((5, 1, -4, 2, 3, -2, 1), (-2, 5, 3, 1, -3, 2, 7)),
    ((1, -1, 1, -1, 1, -1, 1), (1, 3, 9, 27, 81, 243, 729)),
]


def _biv_total_degree(p: dict) -> int:
    return max(a + b for a, b in p)


def _resultant(p: dict, q: dict, var: int) -> list[Fraction]:
    """Resultant eliminating variable ``var`` (0 = b, 1 = c); a polynomial in the other."""
    other = 1 - var
    dp = max(m[var] for m in p)
    dq = max(m[var] for m in q)
    bound = max(1, _biv_total_degree(p) * _biv_total_degree(q))
    xs = list(range(bound + 1))
    ys = []
    for x0 in xs:
        pc = [Fraction(0)] * (dp + 1)
        qc = [Fraction(0)] * (dq + 1)
        for m, c in p.items():
            pc[m[var]] += c * Fraction(x0) ** m[other]
        for m, c in q.items():
            qc[m[var]] += c * Fraction(x0) ** m[other]
        ys.append(up.det(up.sylvester(pc, qc, dp, dq)))
    return up.interpolate(xs, ys)


def _combine(polys: list[dict], weights) -> dict:
    out: dict = {}
    for w, p in zip(itertools.cycle(weights), polys):
        for m, c in p.items():
            out[m] = out.get(m, 0) + w * c
    return {m: c for m, c in out.items() if c != 0}


def _chart_xyz(coeffs: dict[tuple[int, int, int], Fraction]):
    """Remainder of f modulo x + b y + c z: y^r z^s coefficient -> poly in (b, c)."""
    rem: dict[tuple[int, int], dict[tuple[int, int], Fraction]] = {}
    for (i, j, k), a in coeffs.items():
        for r in range(i + 1):
            val = a * (-1) ** i * math.comb(i, r)
            slot = rem.setdefault((r + j, i - r + k), {})
            slot[(r, i - r)] = slot.get((r, i - r), 0) + val
    return [{m: c for m, c in p.items() if c != 0} for p in rem.values()]


def _chart_yz(coeffs: dict[tuple[int, int, int], Fraction]):
    """Remainder of f modulo y + c z: x^i z^s coefficient -> poly in c."""
    rem: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (i, j, k), a in coeffs.items():
        slot = rem.setdefault((i, j + k), {})
        slot[j] = slot.get(j, 0) + a * (-1) ** j
    out = []
    for p in rem.values():
        deg = max(p)
        out.append(up.trim([p.get(e, 0) for e in range(deg + 1)]))
    return [p for p in out if p]


def _residual(f: HomogeneousForm, ell: tuple[float, float, float]) -> float:
    """Relative size of f modulo ell, with ell's leading variable eliminated."""
    lead = next(i for i, v in enumerate(ell) if v != 0)
    lv = ell[lead]
    rest = [i for i in range(3) if i != lead]
    # substitute w_lead = -(sum ell_i w_i)/lv and read off the binary form
    mat = np.zeros((3, 2))
    for col, i in enumerate(rest):
        mat[i, col] = 1.0
        mat[lead, col] = -ell[i] / lv
    fl = HomogeneousForm(3, f.degree, {m: float(c) for m, c in f.coefficients.items()})
    rem = fl.substitute(mat.tolist())
    scale = f.norm() * (np.linalg.norm(ell) / abs(lv)) ** f.degree
    return rem.norm() / scale if scale else 0.0


def linear_factors(f: HomogeneousForm, tol: float = 1e-9) -> list[LinearFactor]:
    """Distinct real linear factors of a ternary form, each up to scale.

    Factors are normalized with leading coefficient 1 in the order x, y, z.
    """
    if f.num_vars != 3:
        raise ValueError("linear_factors expects a form in three variables")
    if f.is_zero():
        raise ValueError("the zero polynomial has every linear factor")
    coeffs = f.coefficients
    big = max(abs(float(c)) for c in coeffs.values())
    exact = {m: to_fraction(c) for m, c in coeffs.items()
             if isinstance(c, Fraction) or abs(float(c)) > 1e-14 * big}
    found: list[LinearFactor] = []

    def accept(ell):
        res = _residual(f, ell)
        if res > tol:
            return
        for other in found:
            if np.allclose(other.coeffs, ell, atol=1e-7, rtol=1e-7):
                return
        found.append(LinearFactor(tuple(float(v) for v in ell), res))

    # chart x + b y + c z
    polys = _chart_xyz(exact)
    polys = [p for p in polys if p]
    if polys and not any(set(p) == {(0, 0)} for p in polys):
        bs = cs = None
        for w1, w2 in _COMBOS:
            p, q = _combine(polys, w1), _combine(polys, w2)
            if not p or not q:
                continue
            rb = _resultant(p, q, 1)
            rc = _resultant(p, q, 0)
            if up.degree(rb) < 0 or up.degree(rc) < 0:
                continue
            bs = up.real_roots(up.squarefree(rb))
            cs = up.real_roots(up.squarefree(rc))
            break
        if bs is None:
            raise RuntimeError("resultant elimination degenerated")
        for b in bs:
            for c in cs:
                accept((1.0, b, c))

    # chart y + c z
    polys = _chart_yz(exact)
    if polys and not any(len(p) == 1 for p in polys):
        g = polys[0]
        for p in polys[1:]:
            g = up.gcd(g, p)
        for c in up.real_roots(up.squarefree(g)):
            accept((0.0, 1.0, c))

    # chart z
    if all(m[2] > 0 for m in exact):
        accept((0.0, 0.0, 1.0))
    return found
