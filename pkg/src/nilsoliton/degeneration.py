"""Diagonal degenerations and the normalized bracket flow.

Under phi_s = exp(-s A) with A = diag(a_1, ..., a_n), the action
g.mu(X, Y) = g mu(g^-1 X, g^-1 Y) multiplies the term (i, j, k) by
exp(s (a_i + a_j - a_k)). The limit s -> infinity exists iff every exponent
on the support is <= 0, and it keeps exactly the terms with exponent 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import _exact, lp
from .algebra_core import Bracket, Triple, derivation_defect_array
from .curvature import ricci_array, soliton_constant


class DivergentLimit(ValueError):
    def __init__(self, offending: dict[Triple, object]):
        terms = ", ".join(f"{key}: {e}" for key, e in offending.items())
        super().__init__(f"diverges: positive exponents on {terms}")
        self.offending = offending


class InfeasibleDegeneration(ValueError):
    """No diagonal direction exists; ``certificate`` proves it."""

    def __init__(self, message: str, certificate: dict):
        super().__init__(message)
        self.certificate = certificate


def exponents(mu: Bracket, a: Sequence) -> dict[Triple, object]:
    a = list(a)
    if len(a) != mu.dim:
        raise ValueError(f"diagonal must have length {mu.dim}")
    return {(i, j, k): a[i - 1] + a[j - 1] - a[k - 1] for (i, j, k) in mu.support()}


def scale_flow(mu: Bracket, a: Sequence, s: float) -> Bracket:
    """exp(-s A).mu, computed termwise."""
    ex = exponents(mu, a)
    return Bracket(mu.dim, [(key, c * math.exp(s * float(ex[key]))) for key, c in mu.items()])


def limit(mu: Bracket, a: Sequence, tol: float = 0.0) -> Bracket:
    """lim_{s -> inf} exp(-s A).mu; exact for rational A.

    ``tol`` widens the zero test for float directions.
    """
    ex = exponents(mu, a)
    bad = {key: e for key, e in ex.items() if e > tol}
    if bad:
        raise DivergentLimit(bad)
    return Bracket(mu.dim, [(key, c) for key, c in mu.items() if abs(ex[key]) <= tol])


@dataclass(frozen=True)
class DegenerationDirection:
    A: tuple
    block_split: tuple[int, int] | None
    exponents: dict = field(compare=False)

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.A]


def _block_rows(n: int, block_split) -> list[list[int]]:
    if block_split is None:
        return []
    n1, n2 = block_split
    if n1 + n2 != n:
        raise ValueError(f"block split {block_split} does not add up to {n}")
    return [[int(i < n1) for i in range(n)], [int(i >= n1) for i in range(n)]]


def verify_degeneration(src: Bracket, dst: Bracket, a: Sequence, block_split=None) -> bool:
    """True iff A is block-traceless (when asked) and lim exp(-sA).src = dst."""
    for row in _block_rows(src.dim, block_split):
        if sum(r * v for r, v in zip(row, a)) != 0:
            return False
    try:
        return limit(src, a) == dst
    except DivergentLimit:
        return False


def find_degeneration(src: Bracket, dst: Bracket,
                      block_split: tuple[int, int] | None = None) -> DegenerationDirection:
    """A diagonal A with lim exp(-sA).src = dst.

    Solves a_i + a_j - a_k = 0 on the support of dst and <= -1 on the rest
    of the support of src (plus block traces 0). Raises
    :class:`InfeasibleDegeneration` with a Farkas certificate when no such A
    exists.
    """
    n = src.dim
    if dst.dim != n:
        raise ValueError("brackets live on different spaces")
    src_terms, dst_terms = src.terms, dst.terms
    if not set(dst_terms) <= set(src_terms):
        raise ValueError("precondition violated: support of target is not contained in source")
    if any(src_terms[key] != c for key, c in dst_terms.items()):
        raise ValueError("precondition violated: coefficients differ on the shared support")

    def row(key):
        i, j, k = key
        r = [0] * n
        r[i - 1] += 1
        r[j - 1] += 1
        r[k - 1] -= 1
        return r

    eq = [row(key) for key in dst.support("lex")] + _block_rows(n, block_split)
    dying = [key for key in src.support("lex") if key not in dst_terms]
    null = _exact.nullspace(eq, n) if eq else _exact.nullspace([[0] * n], n)
    d = len(null)
    if not dying:
        a = [Fraction(0)] * n
        return DegenerationDirection(tuple(a), block_split, exponents(src, a))
    # inequalities  row(key) . (N y) <= -1
    g = [[_exact.dot(row(key), v) for v in null] for key in dying]
    h = [Fraction(-1)] * len(dying)
    y = _vertex_search(g, h) if d <= 3 else lp.feasible_point(g, h)
    if y is None:
        cert = lp.farkas_certificate(g, h)
        raise InfeasibleDegeneration(
            "no diagonal degeneration exists",
            {"farkas_multipliers": dict(zip(dying, cert or [])),
             "free_dimension": d},
        )
    a = [sum((y[k] * null[k][i] for k in range(d)), Fraction(0)) for i in range(n)]
    if not verify_degeneration(src, dst, a, block_split):
        raise RuntimeError("computed direction failed verification")
    return DegenerationDirection(tuple(a), block_split, exponents(src, a))


def _vertex_search(g, h) -> list[Fraction] | None:
    """Smallest-norm vertex of {y : g y <= h}, after removing its lineality space."""
    d = len(g[0]) if g else 0
    if d == 0:
        return [] if all(v >= 0 for v in h) else None
    basis = _exact.rref(g)[0][: _exact.rank(g)]  # row space of g
    r = len(basis)
    if r == 0:
        return [Fraction(0)] * d if all(v >= 0 for v in h) else None
    # y = B^T z with B the row-space basis
    gz = [[_exact.dot(gi, b) for b in basis] for gi in g]
    best = None
    for rows in itertools.combinations(range(len(gz)), r):
        sub = [gz[i] for i in rows]
        if _exact.rank(sub) < r:
            continue
        z = _exact.solve(sub, [h[i] for i in rows])
        if z is None or any(_exact.dot(gz[i], z) > h[i] for i in range(len(gz))):
            continue
        y = [sum((z[k] * basis[k][i] for k in range(r)), Fraction(0)) for i in range(d)]
        key = _exact.dot(y, y)
        if best is None or key < best[0]:
            best = (key, y)
    return None if best is None else best[1]


# -- normalized bracket flow --------------------------------------------------


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowResult:
    limit: Bracket
    converged_to_nilsoliton: bool
    residual: float
    iterations: int
    accepted: int
    rejected: int
    energy_initial: float
    energy_final: float
    step: float
    energies: tuple[float, ...] = field(repr=False, default=())

    def support_pattern(self, rel: float = 1e-4) -> dict[Triple, bool]:
        """Which terms of the limit carry more than ``rel`` of the largest mass.

        Mass is the squared coefficient, the scale on which the energy lives.
        """
        top = max((float(c) ** 2 for _, c in self.limit.items()), default=0.0)
        return {key: float(c) ** 2 > rel * top for key, c in self.limit.items()}


def energy(mu: Bracket) -> float:
    """Scale-invariant functional |Ric|^2 / |mu|^4."""
    return _energy(mu.to_array())


def _energy(c: np.ndarray) -> float:
    ric = ricci_array(c)
    return float(np.trace(ric @ ric) / (c * c).sum() ** 2)


def _flow_direction(c: np.ndarray) -> tuple[np.ndarray, float]:
    ric = ricci_array(c)
    d = ric - soliton_constant(ric) * np.eye(c.shape[0])
    res = float(np.linalg.norm(derivation_defect_array(c, d), axis=2).max())
    return d, res


def _act_array(g: np.ndarray, gi: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.einsum("kc,ai,bj,abc->ijk", g, gi, gi, c, optimize=True)


def ricci_structurally_diagonal(mu: Bracket) -> bool:
    """True when no two support terms can produce an off-diagonal Ricci entry.

    Then Ric stays diagonal for every choice of coefficients on this support,
    in particular along diagonal flows.
    """
    by_pair: dict[tuple[int, int], list[int]] = {}
    by_out: dict[tuple[int, int], set[int]] = {}
    for i, j, k in mu.support():
        by_pair.setdefault((i, j), []).append(k)
        # <mu(e_a, e_x), e_k> for a in {i, j}: key (other index, k) -> a
        by_out.setdefault((j, k), set()).add(i)
        by_out.setdefault((i, k), set()).add(j)
    return all(len(v) == len(set(v)) and len(v) == 1 for v in by_pair.values()) and all(
        len(v) == 1 for v in by_out.values())


class _SupportFlow:
    """The flow restricted to a fixed support with diagonal Ricci."""

    def __init__(self, mu: Bracket):
        self.keys = mu.support("lex")
        n = mu.dim
        self.n = n
        self.w = np.zeros((len(self.keys), n))
        for p, (i, j, k) in enumerate(self.keys):
            self.w[p, k - 1] += 1
            self.w[p, i - 1] -= 1
            self.w[p, j - 1] -= 1
        self.x = np.array([float(c) for c in (mu.terms[key] for key in self.keys)])

    def ricci_diag(self, x):
        return 0.5 * self.w.T @ (x * x)

    def energy(self, x):
        r = self.ricci_diag(x)
        return float(r @ r / (2 * x @ x) ** 2)

    def direction(self, x):
        r = self.ricci_diag(x)
        d = r - (r @ r) / r.sum()
        weight = self.w @ d  # d_k - d_i - d_j per term
        # pairs are distinct on this support, so each defect is a single term
        res = float(np.abs(weight * x).max())
        return weight, res


def soliton_flow(mu0: Bracket, step: float = 1e-2, max_iter: int = 100_000,
                 tol: float = 1e-7, record_every: int = 100,
                 max_step: float = 1.0) -> FlowResult:
    """Descend |Ric|^2/|mu|^4 along mu' = -pi(Ric - cI) mu at fixed |mu|.

    Each step applies the group element exp(-h (Ric - cI)) to mu, so iterates
    stay in the orbit of mu0 and the Jacobi identity is kept to roundoff. The
    step starts at ``step``, is halved whenever the energy would increase and
    grows by 1.25 after accepted steps up to ``max_step``.

    When the support forces a diagonal Ricci operator the flow only rescales
    the existing terms and runs on the coefficient vector directly. Otherwise
    the full action is used, with the derivation part of Ric - cI removed
    before each step (it does not move the bracket, only the roundoff).
    """
    if mu0.is_zero():
        raise ValueError("the zero bracket has no flow")
    if ricci_structurally_diagonal(mu0):
        return _run_support_flow(mu0, step, max_iter, tol, record_every, max_step)
    return _run_dense_flow(mu0, step, max_iter, tol, record_every, max_step)


def _run_support_flow(mu0, step, max_iter, tol, record_every, max_step) -> FlowResult:
    sf = _SupportFlow(mu0)
    x = sf.x
    radius2 = x @ x
    e = e0 = sf.energy(x)
    weight, res = sf.direction(x)
    h = step
    accepted = rejected = it = 0
    energies = [e]
    while it < max_iter and res > tol:
        it += 1
        cand = x * np.exp(-h * weight)
        cand *= math.sqrt(radius2 / (cand @ cand))
        ec = sf.energy(cand)
        if ec <= e:
            x, e = cand, ec
            accepted += 1
            weight, res = sf.direction(x)
            if accepted % record_every == 0:
                energies.append(e)
            h = min(h * 1.25, max_step)
        else:
            rejected += 1
            h *= 0.5
            if h < 1e-14:
                break
    energies.append(e)
    converged = res <= tol
    if not converged and accepted == 0:
        raise FlowError("flow made no progress: energy never decreased")
    lim = Bracket(mu0.dim, list(zip(sf.keys, x.tolist())))
    return FlowResult(lim, converged, res, it, accepted, rejected, e0, e, h, tuple(energies))


def _without_derivations(c: np.ndarray, d: np.ndarray, rel: float = 1e-9) -> np.ndarray:
    """Remove from d its Frobenius projection onto the derivations of c.

    Derivations do not move the bracket, so pi(d) c is unchanged, but they
    stretch the noise directions off the variety of Lie brackets; without
    this step roundoff there grows like exp(17 t) on the 9-dimensional curves.
    """
    n = c.shape[0]
    # m[p, q] is the derivation defect of the matrix unit E_pq
    m = np.zeros((n, n, n, n, n))
    q = np.arange(n)
    for p in range(n):
        m[p, :, :, :, p] += c.transpose(2, 0, 1)
        m[p, q, q, :, :] -= c[p]
        m[p, q, :, q, :] -= c[:, p, :][None]
    m = m.reshape(n * n, -1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int((s > rel * max(s[0], 1.0)).sum())
    der = u[:, rank:].T
    flat = d.reshape(-1)
    return (flat - der.T @ (der @ flat)).reshape(n, n)


def _run_dense_flow(mu0, step, max_iter, tol, record_every, max_step) -> FlowResult:
    c = mu0.to_array()
    n = c.shape[0]
    radius = math.sqrt((c * c).sum())
    e = e0 = _energy(c)
    h = step
    accepted = rejected = 0
    energies = [e]
    d, res = _flow_direction(c)
    dp = _without_derivations(c, d)
    it = 0
    while it < max_iter and res > tol:
        it += 1
        cand = _act_array(expm(-h * dp), expm(h * dp), c)
        cand *= radius / math.sqrt((cand * cand).sum())
        ec = _energy(cand)
        if ec <= e:
            c, e = cand, ec
            accepted += 1
            d, res = _flow_direction(c)
            dp = _without_derivations(c, d)
            if accepted % record_every == 0:
                energies.append(e)
            h = min(h * 1.25, max_step)
        else:
            rejected += 1
            h *= 0.5
            if h < 1e-14:
                break
    energies.append(e)
    converged = res <= tol
    if not converged and accepted == 0:
        raise FlowError("flow made no progress: energy never decreased")
    lim = Bracket.from_array(c)
    return FlowResult(lim, converged, res, it, accepted, rejected, e0, e, h, tuple(energies))
