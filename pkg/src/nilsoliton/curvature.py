"""Ricci operator of a bracket with the canonical inner product.

For any skew bracket mu on R^n,

    <Ric X, Y> = -1/2 sum_ij <mu(X, e_i), e_j><mu(Y, e_i), e_j>
                 + 1/4 sum_ij <mu(e_i, e_j), X><mu(e_i, e_j), Y>.

The canonical metric is a nilsoliton when Ric = c I + D with D a derivation.
Since tr(Ric D) = 0 for every derivation D of a nilpotent algebra, the only
possible constant is c = tr(Ric^2) / tr(Ric).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra_core import Bracket, derivation_residual, validate

NILSOLITON_TOL = 1e-9


def ricci(mu: Bracket) -> np.ndarray:
    return ricci_array(mu.to_array())


def ricci_array(c: np.ndarray) -> np.ndarray:
    """Ricci operator from a dense structure-constant array C[i, j, k]."""
    return -0.5 * np.einsum("aij,bij->ab", c, c) + 0.25 * np.einsum("ija,ijb->ab", c, c)


def scalar(mu: Bracket) -> float:
    return float(np.trace(ricci(mu)))


@dataclass(frozen=True)
class NilsolitonCertificate:
    is_nilsoliton: bool
    c: float
    D: np.ndarray
    residual: float


def soliton_constant(ric: np.ndarray) -> float:
    tr = np.trace(ric)
    if tr == 0:
        raise ValueError("soliton constant undefined for the zero bracket")
    return float(np.trace(ric @ ric) / tr)


def nilsoliton_check(mu: Bracket, tol: float = NILSOLITON_TOL) -> NilsolitonCertificate:
    """Test whether the canonical metric on (R^n, mu) is a nilsoliton.

    A negative answer only concerns the canonical inner product; it does not
    by itself rule out a nilsoliton metric elsewhere on the orbit.
    """
    if mu.is_zero():
        raise ValueError("soliton constant undefined for the zero bracket")
    v = validate(mu)
    if not v.jacobi_ok:
        raise ValueError("bracket does not satisfy the Jacobi identity")
    if not v.nilpotent:
        raise ValueError("bracket is not nilpotent")
    ric = ricci(mu)
    c = soliton_constant(ric)
    d = ric - c * np.eye(mu.dim)
    res = derivation_residual(mu, d)
    return NilsolitonCertificate(res <= tol, c, d, res)
