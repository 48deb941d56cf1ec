import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from nilsoliton.algebra_core import Bracket, act, validate
from nilsoliton.curvature import nilsoliton_check, ricci
from nilsoliton.degeneration import (DivergentLimit, InfeasibleDegeneration, energy, exponents,
                                     find_degeneration, limit, ricci_structurally_diagonal,
                                     scale_flow, soliton_flow, verify_degeneration)
from nilsoliton.families import mu, mu_bar, mu_tilde
from nilsoliton import lp

from conftest import random_orthogonal, rational_brackets

A1 = (-1, -1, 1, 1, 0, 0, 1, -1, 0)
A2 = tuple(Fraction(x, 3) for x in (0, -2, 0, -2, 3, 1, 1, 1, -2))
PRINTED_BAR = (0, -1, 0, -1, -3, 2, 2, 2, -1)


def test_scale_flow_trivial():
    m = mu_tilde(2)
    assert scale_flow(m, [0] * 9, 3.0).allclose(m, 0)
    doubled = scale_flow(m, [1] * 9, 0.5)
    assert doubled.allclose(m.as_float().scaled(math.exp(0.5)), 1e-15)


def test_scale_flow_exponents():
    ex = exponents(mu_tilde(2), A1)
    assert ex[(1, 2, 7)] == -3
    assert all(ex[k] == 0 for k in mu(2).terms)
    s = 1.3
    moved = scale_flow(mu_tilde(2), A1, s)
    assert moved.terms[(1, 2, 7)] == pytest.approx(math.exp(-3 * s))


def test_scale_flow_matches_action():
    m = mu_bar(1.5)
    s = 0.7
    g = np.diag(np.exp(-s * np.array(A2, dtype=float)))
    assert scale_flow(m, A2, s).allclose(act(g, m), 1e-12)


@pytest.mark.parametrize("t", [Fraction(3, 2), 2])
def test_limit_tilde(t):
    assert limit(mu_tilde(t), A1) == mu(t)
    assert limit(mu_bar(t), A2) == mu(t)
    assert limit(mu(t), [0] * 9) == mu(t)


def test_limit_agrees_with_large_s():
    for src, a in ((mu_tilde(2), A1), (mu_bar(2), A2)):
        far = scale_flow(src, a, 40.0)
        lim = limit(src, a)
        for key, c in far.items():
            if key in lim.terms:
                assert c == lim.terms[key]
            else:
                assert abs(c) < 1e-12


def test_limit_diverges():
    with pytest.raises(DivergentLimit) as info:
        limit(mu_tilde(2), [-v for v in A1])
    assert (1, 2, 7) in info.value.offending
    assert "diverges" in str(info.value)


def test_printed_bar_direction_fails():
    ex = exponents(mu_bar(2), PRINTED_BAR)
    assert ex[(4, 5, 7)] == -6
    assert not verify_degeneration(mu_bar(2), mu(2), PRINTED_BAR, (6, 3))


@pytest.mark.parametrize("src, a", [(mu_tilde, A1), (mu_bar, A2)])
def test_known_directions_verify(src, a):
    assert verify_degeneration(src(2), mu(2), a, (6, 3))


@pytest.mark.parametrize("src", [mu_tilde, mu_bar])
@pytest.mark.parametrize("t", [Fraction(3, 2), 2, 3])
def test_find_degeneration(src, t):
    d = find_degeneration(src(t), mu(t), (6, 3))
    assert limit(src(t), d.A) == mu(t)
    assert sum(d.A[:6]) == 0 and sum(d.A[6:]) == 0
    assert all(e <= -1 for k, e in d.exponents.items() if k not in mu(t).terms)


def test_find_degeneration_without_split():
    d = find_degeneration(mu_bar(2), mu_tilde(2))
    assert limit(mu_bar(2), d.A) == mu_tilde(2)
    assert d.block_split is None


def test_find_degeneration_preconditions():
    with pytest.raises(ValueError, match="not contained"):
        find_degeneration(mu(2), mu_tilde(2))
    with pytest.raises(ValueError, match="coefficients differ"):
        find_degeneration(mu_tilde(2), mu(3))


def test_find_degeneration_infeasible():
    # the weight of (2,3,5) is a combination of the surviving weights
    src = Bracket(6, {(1, 2, 5): 1, (3, 4, 6): 1, (1, 4, 6): 1, (2, 3, 5): 1})
    dst = Bracket(6, {(1, 2, 5): 1, (3, 4, 6): 1, (1, 4, 6): 1})
    with pytest.raises(InfeasibleDegeneration) as info:
        find_degeneration(src, dst)
    cert = info.value.certificate["farkas_multipliers"]
    assert all(u >= 0 for u in cert.values()) and sum(cert.values()) > 0


def test_find_degeneration_lp_path():
    # many free parameters forces the LP branch
    src = Bracket(8, {(1, 2, 7): 1, (3, 4, 8): 1, (1, 3, 8): 1})
    dst = Bracket(8, {(1, 2, 7): 1})
    d = find_degeneration(src, dst)
    assert limit(src, d.A) == dst


def test_lp_feasibility_and_farkas():
    g = [[1, 0], [0, 1], [-1, -1]]
    assert lp.feasible_point(g, [1, 1, -1]) is not None
    assert lp.feasible_point(g, [0, 0, -1]) is None
    u = lp.farkas_certificate(g, [0, 0, -1])
    assert all(x >= 0 for x in u)
    assert [sum(r[j] * x for r, x in zip(g, u)) for j in range(2)] == [0, 0]
    assert sum(h * x for h, x in zip([0, 0, -1], u)) == -1


def test_structural_diagonal():
    assert ricci_structurally_diagonal(mu_bar(2))
    assert not ricci_structurally_diagonal(Bracket(4, {(1, 2, 3): 1, (1, 2, 4): 1}))
    assert ricci_structurally_diagonal(Bracket(5, {(1, 2, 5): 1, (3, 4, 5): 1, (1, 3, 4): 1}))
    assert not ricci_structurally_diagonal(Bracket(4, {(1, 2, 4): 1, (1, 3, 4): 1}))


def test_flow_fixed_points():
    r = soliton_flow(mu(1).scaled(3))
    assert r.converged_to_nilsoliton and r.residual < 1e-7
    assert set(r.limit.terms) == set(mu(1).terms)
    h = soliton_flow(Bracket(3, {(1, 2, 3): 2}))
    assert h.converged_to_nilsoliton


def test_flow_converges_from_generic_start():
    b = Bracket(5, {(1, 2, 3): 1, (1, 3, 4): 1, (1, 4, 5): 0.5, (2, 3, 5): 2.0})
    r = soliton_flow(b)
    assert r.converged_to_nilsoliton
    assert nilsoliton_check(r.limit, tol=1e-6).is_nilsoliton
    assert all(np.diff(r.energies) <= 0)


def test_flow_tilde_suppresses_extra_term():
    r = soliton_flow(mu_tilde(2))
    assert all(np.diff(r.energies) <= 0)
    assert r.energy_final < r.energy_initial
    top = max(abs(c) for _, c in r.limit.items())
    assert (r.limit.terms[(1, 2, 7)] / top) ** 2 < 1e-4
    assert validate(r.limit).jacobi_ok
    assert r.energy_final == pytest.approx(energy(mu(2)), rel=1e-8)


def test_flow_dense_path(rng):
    q = random_orthogonal(rng, 9)
    b = act(q, mu_tilde(2))
    assert not ricci_structurally_diagonal(b)
    r = soliton_flow(b, max_iter=150, record_every=1)
    assert all(np.diff(r.energies) <= 0)
    assert r.energy_final < r.energy_initial
    assert validate(r.limit, tol=1e-12).jacobi_ok
    assert r.energy_final == pytest.approx(energy(mu(2)), rel=1e-4)


def test_flow_paths_agree():
    from nilsoliton.degeneration import _run_dense_flow
    a = soliton_flow(mu_bar(2), max_iter=100)
    b = _run_dense_flow(mu_bar(2), 1e-2, 100, 1e-7, 100, 1.0)
    # same flow, different splitting of exp(-h D) once derivations are removed
    assert a.energy_final == pytest.approx(b.energy_final, rel=1e-6)
    assert a.limit.allclose(b.limit, 1e-2)


def test_flow_zero_bracket():
    with pytest.raises(ValueError):
        soliton_flow(Bracket.zero(3))


@settings(max_examples=100, deadline=None)
@given(rational_brackets())
def test_structural_diagonal_implies_diagonal_ricci(b):
    if ricci_structurally_diagonal(b):
        r = ricci(b)
        assert np.abs(r - np.diag(np.diag(r))).max() == 0
