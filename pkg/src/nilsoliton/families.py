"""Three curves of 2-step nilpotent algebras of type (6, 3) and the analysis pipeline.

``mu(t)`` is a curve of nilsolitons. ``mu_tilde(t)`` and ``mu_bar(t)`` add one
and two brackets to it; the canonical metric on them is not a nilsoliton and
they degenerate to ``mu(t)`` along diagonal one-parameter subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import two_step
from .algebra_core import Bracket, Validation, norm2, validate
from .curvature import NilsolitonCertificate, nilsoliton_check, ricci
from .degeneration import (DegenerationDirection, InfeasibleDegeneration, find_degeneration,
                           limit)
from .strata import (EigenvalueType, EinsteinSystem, PayneResult, WeightSystem,
                     eigenvalue_type, einstein_system, min_norm_point, payne_check, weights)
from .polynomial import HomogeneousForm

EINSTEIN_NILRADICAL = "einstein_nilradical"
OBSTRUCTED = "canonical_metric_not_soliton_with_obstruction_chain"
UNDECIDED = "undecided"

CLOSED_ORBIT_NOTE = (
    "cited result: a stratum holds a unique closed orbit of nilsolitons, so an "
    "algebra whose canonical metric is not a soliton and which degenerates to a "
    "non-isomorphic nilsoliton of the same stratum is not an Einstein nilradical; "
    "this last step is cited, not computed")
HYPOTHESIS_NOTE = "t <= 1: the obstruction argument is stated for t > 1 only"


def _param(t):
    if isinstance(t, bool):
        raise TypeError("parameter must be a number")
    if isinstance(t, int):
        return Fraction(t)
    return t


def _base_terms(t):
    t = _param(t)
    return [((5, 4, 7), 1), ((1, 6, 8), 1), ((3, 2, 9), 1),
            ((3, 6, 7), t), ((5, 2, 8), t), ((1, 4, 9), t)]


def mu(t) -> Bracket:
    return Bracket(9, _base_terms(t))


def mu_tilde(t) -> Bracket:
    return Bracket(9, _base_terms(t) + [((1, 2, 7), 1)])


def mu_bar(t) -> Bracket:
    return Bracket(9, _base_terms(t) + [((1, 2, 7), 1), ((3, 4, 8), 1)])


FAMILIES: dict[str, Callable[[object], Bracket]] = {
    "mu": mu, "mu_tilde": mu_tilde, "mu_bar": mu_bar}


def family(name: str, t) -> Bracket:
    try:
        return FAMILIES[name](t)
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def trace_form_max(mu_: Bracket, seed: int = 0) -> tuple[HomogeneousForm, two_step.SphereMax]:
    """tr J(w)^4 of mu/|mu| and its maximum on the unit sphere of the center."""
    f = two_step.trace_power_form(mu_, 4)
    n2 = norm2(mu_)
    f = f * (1 / (n2 * n2))
    return f, two_step.sphere_max(f, seed=seed)


def exact_beta(ws: WeightSystem, es: EinsteinSystem):
    """sum c_i alpha_i for a convex solution c of U c = nu [1], when one exists.

    Such a point has <beta, alpha_j> = |beta|^2 for every weight, hence is the
    minimal-norm point of the convex hull.
    """
    if es.convex_solution is None:
        return None
    n = len(ws.weights[0])
    return tuple(sum((c * w[i] for c, w in zip(es.convex_solution, ws.weights)), Fraction(0))
                 for i in range(n))


@dataclass
class Degeneration:
    target_name: str
    direction: DegenerationDirection | None
    limit_verified: bool
    target_nilsoliton: bool
    same_stratum: bool
    target_factor_count: int | None
    separated: bool
    failure: str | None = None


@dataclass
class NilsolitonReport:
    name: str
    t: object
    bracket: Bracket
    validation: Validation
    certificate: NilsolitonCertificate | None = None
    weight_system: WeightSystem | None = None
    payne: PayneResult | None = None
    einstein: EinsteinSystem | None = None
    beta: np.ndarray | None = None
    beta_exact: tuple | None = None
    nu: float | None = None
    eigen_type: EigenvalueType | str | None = None
    two_step_type: tuple[int, int] | None = None
    pfaffian: HomogeneousForm | None = None
    linear_factors: list | None = None
    trace_form: HomogeneousForm | None = None
    trace_max: two_step.SphereMax | None = None
    degeneration: Degeneration | None = None
    flow: object = None
    verdict: str = UNDECIDED
    notes: list[str] = field(default_factory=list)

    @property
    def nilsoliton(self) -> bool | None:
        return None if self.certificate is None else self.certificate.is_nilsoliton

    @property
    def factor_count(self) -> int | None:
        return None if self.linear_factors is None else len(self.linear_factors)

    @property
    def obstruction_chain_complete(self) -> bool:
        d = self.degeneration
        return (self.nilsoliton is False and d is not None and d.limit_verified
                and d.target_nilsoliton and d.same_stratum and d.separated)


def _same_beta(a: NilsolitonReport, b: NilsolitonReport, tol: float = 1e-9) -> bool:
    if a.beta_exact is not None and b.beta_exact is not None:
        return a.beta_exact == b.beta_exact
    if a.beta is None or b.beta is None:
        return False
    return bool(np.abs(a.beta - b.beta).max() <= tol)


def analyze(bracket: Bracket, name: str = "input", t=None, *, ordering: str = "lex",
            tol: float = 1e-9, seed: int = 0, target: tuple[str, Bracket] | None = None,
            flow: bool = False, trace_max: bool = True) -> NilsolitonReport:
    """Run every invariant that applies to ``bracket``.

    Stops after validation when the bracket is not a nilpotent Lie bracket.
    ``target`` is a (name, bracket) pair tried as a diagonal degeneration.
    """
    v = validate(bracket)
    rep = NilsolitonReport(name, t, bracket, v)
    if not (v.jacobi_ok and v.nilpotent) or bracket.is_zero():
        rep.notes.append("not a nonzero nilpotent Lie bracket; analysis stopped")
        return rep
    rep.certificate = nilsoliton_check(bracket, tol=tol)
    ws = weights(bracket, ordering)
    rep.weight_system = ws
    ric = ricci(bracket)
    if np.abs(ric - np.diag(np.diag(ric))).max() <= 1e-10:
        rep.payne = payne_check(bracket, ordering=ordering)
    else:
        rep.notes.append("Ricci operator not diagonal in the canonical basis; Payne check skipped")
    rep.einstein = einstein_system(ws)
    rep.beta_exact = exact_beta(ws, rep.einstein)
    rep.beta = min_norm_point(ws.weight_array()).beta
    rep.nu = float(rep.beta @ rep.beta)
    rep.eigen_type = eigenvalue_type(rep.beta_exact if rep.beta_exact is not None else rep.beta)

    try:
        sp = two_step.split(bracket)
    except ValueError as exc:
        rep.notes.append(f"two-step invariants skipped: {exc}")
    else:
        rep.two_step_type = sp.type
        n1, n2 = sp.type
        if n1 % 2 == 0:
            rep.pfaffian = two_step.pfaffian_form(bracket)
            if n2 == 3 and not rep.pfaffian.is_zero():
                rep.linear_factors = two_step.linear_factors(rep.pfaffian)
        if trace_max:
            rep.trace_form, rep.trace_max = trace_form_max(bracket, seed)

    if target is not None:
        rep.degeneration = _degeneration_evidence(rep, target, ordering, tol, seed)
    if flow:
        from .degeneration import soliton_flow
        rep.flow = soliton_flow(bracket)

    if rep.nilsoliton:
        rep.verdict = EINSTEIN_NILRADICAL
    elif rep.obstruction_chain_complete:
        rep.verdict = OBSTRUCTED
        rep.notes.append(CLOSED_ORBIT_NOTE)
    return rep


def _degeneration_evidence(rep: NilsolitonReport, target, ordering, tol, seed) -> Degeneration:
    tname, tgt = target
    split_ = rep.two_step_type
    try:
        d = find_degeneration(rep.bracket, tgt, split_)
    except (InfeasibleDegeneration, ValueError) as exc:
        return Degeneration(tname, None, False, False, False, None, False, str(exc))
    verified = limit(rep.bracket, d.A) == tgt
    trep = analyze(tgt, tname, ordering=ordering, tol=tol, seed=seed, trace_max=False)
    same = _same_beta(rep, trep)
    count = trep.factor_count
    separated = (rep.factor_count is not None and count is not None
                 and rep.factor_count != count)
    return Degeneration(tname, d, verified, bool(trep.nilsoliton), same, count, separated)


def certificate(which: str, t, *, seed: int = 0, tol: float = 1e-9,
                ordering: str = "declared") -> NilsolitonReport:
    """Full report for a built-in curve; tilde and bar curves are degenerated to mu(t)."""
    b = family(which, t)
    target = None if which == "mu" else (f"mu({t})", mu(t))
    rep = analyze(b, which, t, ordering=ordering, tol=tol, seed=seed, target=target)
    if which != "mu" and float(t) <= 1:
        rep.notes.append(HYPOTHESIS_NOTE)
    return rep


def m_t(t) -> Fraction | float:
    """Closed form of the trace-4 maximum for mu(t)/|mu(t)|, valid for |t| >= 1."""
    t = _param(t)
    return (1 + t**4) / (18 * (1 + t * t) ** 2)


@dataclass(frozen=True)
class Separation:
    distinct: bool
    witness: str
    cited: bool = False


def separate_curve_points(which: str, t, s, seed: int = 0, tol: float = 1e-8) -> Separation:
    """Decide whether the curve points at t and s are non-isomorphic (t, s > 1).

    On the mu curve the witness is the maximum of tr J(w)^4 over unit central w
    for the normalized bracket, an isomorphism invariant up to orthogonal change
    of basis of the center. The other curves reduce to their degeneration targets.
    """
    if float(t) <= 1 or float(s) <= 1:
        raise ValueError("curve points are only separated for t, s > 1")
    family(which, t)  # validates the name
    mt = trace_form_max(mu(t), seed)[1].max
    ms = trace_form_max(mu(s), seed)[1].max
    distinct = abs(mt - ms) > tol
    witness = f"M_t = {mt:.12g}, M_s = {ms:.12g}"
    if which == "mu":
        return Separation(distinct, witness)
    return Separation(distinct, f"targets mu({t}), mu({s}): {witness}; {CLOSED_ORBIT_NOTE}", True)
