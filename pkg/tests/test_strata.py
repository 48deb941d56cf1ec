from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nilsoliton.algebra_core import Bracket
from nilsoliton.families import mu, mu_bar, mu_tilde
from nilsoliton.strata import (NON_INTEGRAL, EigenvalueType, einstein_system, eigenvalue_type,
                               min_norm_point, min_norm_point_bruteforce, payne_check, weights)

THIRD = Fraction(1, 3)
BETA = (-THIRD,) * 6 + (THIRD,) * 3

U_MU = [
    [3, 0, 0, 1, 1, 1],
    [0, 3, 0, 1, 1, 1],
    [0, 0, 3, 1, 1, 1],
    [1, 1, 1, 3, 0, 0],
    [1, 1, 1, 0, 3, 0],
    [1, 1, 1, 0, 0, 3],
]
U_TILDE = [
    [3, 0, 0, 1, 1, 1, 1],
    [0, 3, 0, 1, 1, 1, 1],
    [0, 0, 3, 1, 1, 1, 1],
    [1, 1, 1, 3, 0, 0, 1],
    [1, 1, 1, 0, 3, 0, 1],
    [1, 1, 1, 0, 0, 3, 1],
    [1, 1, 1, 1, 1, 1, 3],
]
U_BAR = [
    [3, 0, 0, 1, 1, 1, 1, 1],
    [0, 3, 0, 1, 1, 1, 1, 1],
    [0, 0, 3, 1, 1, 1, 1, 1],
    [1, 1, 1, 3, 0, 0, 1, 1],
    [1, 1, 1, 0, 3, 0, 1, 1],
    [1, 1, 1, 0, 0, 3, 1, 1],
    [1, 1, 1, 1, 1, 1, 3, 0],
    [1, 1, 1, 1, 1, 1, 0, 3],
]


@pytest.mark.parametrize("ctor, printed", [(mu, U_MU), (mu_tilde, U_TILDE), (mu_bar, U_BAR)])
def test_gram_matches_printed_tables(ctor, printed):
    ws = weights(ctor(2), "declared")
    assert [list(r) for r in ws.gram] == printed
    assert ws.order[:3] == ((4, 5, 7), (1, 6, 8), (2, 3, 9))


def test_gram_invariants():
    for ctor in (mu, mu_tilde, mu_bar):
        u = weights(ctor(Fraction(3, 2)), "lex").gram_array()
        assert (np.diag(u) == 3).all()
        assert np.array_equal(u, u.T)
        assert np.linalg.eigvalsh(u).min() >= -1e-12


def test_single_term_weights():
    ws = weights(Bracket(3, {(1, 2, 3): 1}))
    assert ws.gram == ((3,),)
    assert ws.weights == ((-1, -1, 1),)


def test_weights_of_zero_bracket():
    with pytest.raises(ValueError):
        weights(Bracket.zero(3))


@pytest.mark.parametrize("t", [1, 2])
def test_payne_curve(t):
    u = np.array(U_MU)
    v = np.array([1, 1, 1, t * t, t * t, t * t])
    assert (u @ v == (3 + 3 * t * t)).all()
    res = payne_check(mu(t), ordering="declared")
    assert res.holds and res.nu == 3 + 3 * t * t
    assert list(res.lhs) == [3 + 3 * t * t] * 6


def test_payne_tilde_fails():
    res = payne_check(mu_tilde(2), ordering="declared")
    assert not res.holds
    assert list(res.lhs) == [16, 16, 16, 16, 16, 16, 18]


def test_payne_single_term():
    res = payne_check(Bracket(3, {(1, 2, 3): 1}))
    assert res.holds and res.nu == 3


def test_payne_requires_diagonal_ricci():
    b = Bracket(4, {(1, 2, 3): 1, (1, 2, 4): 1})
    with pytest.raises(ValueError, match="not diagonal"):
        payne_check(b)


def test_einstein_system_curve():
    es = einstein_system(weights(mu(1), "declared"))
    assert es.convex_solution == (Fraction(1, 6),) * 6
    assert es.nu == 1


@pytest.mark.parametrize("ctor, zeros", [(mu_tilde, 1), (mu_bar, 2)])
def test_einstein_system_extended(ctor, zeros):
    es = einstein_system(weights(ctor(2), "declared"))
    assert es.convex_solution == (Fraction(1, 6),) * 6 + (0,) * zeros
    assert len(es.null_basis) == 1
    assert es.nu == 1


def test_einstein_system_solutions_satisfy_equations():
    ws = weights(mu_bar(3), "lex")
    es = einstein_system(ws)
    for c in [es.particular] + [tuple(p + q for p, q in zip(es.particular, n)) for n in es.null_basis]:
        assert sum(c) == 1 or c is not es.particular
        assert all(sum(u * x for u, x in zip(row, c)) == es.nu for row in ws.gram)


@pytest.mark.parametrize("ctor", [mu, mu_tilde, mu_bar])
def test_min_norm_point_families(ctor):
    for t in (1, 1.5, 2):
        ws = weights(ctor(t))
        res = min_norm_point(ws.weight_array())
        assert np.abs(res.beta - np.array(BETA, dtype=float)).max() <= 1e-10
        assert res.nu == pytest.approx(1, abs=1e-10)
        assert res.coefficients.sum() == pytest.approx(1)
        assert (res.coefficients >= 0).all()
        assert np.allclose(res.coefficients @ ws.weight_array(), res.beta)


def test_min_norm_point_zero_weight_on_extra_terms():
    ws = weights(mu_bar(2), "declared")
    res = min_norm_point(ws.weight_array())
    assert np.abs(res.coefficients[6:]).max() <= 1e-12


def test_min_norm_point_single_point():
    assert np.array_equal(min_norm_point([[1.0, 2.0, 3.0]]).beta, [1, 2, 3])


def test_min_norm_point_empty():
    with pytest.raises(ValueError):
        min_norm_point([])


point_sets = st.integers(1, 8).flatmap(
    lambda m: st.lists(st.lists(st.integers(-3, 3), min_size=9, max_size=9), min_size=m, max_size=m))


@settings(max_examples=60, deadline=None)
@given(point_sets)
def test_min_norm_point_optimality(points):
    p = np.array(points, dtype=float)
    beta = min_norm_point(p).beta
    assert (p @ beta - beta @ beta).min() >= -1e-10
    oracle = min_norm_point_bruteforce(p)
    assert np.abs(beta - oracle).max() <= 1e-8


def test_min_norm_point_agrees_with_oracle_random(rng):
    for _ in range(50):
        m = int(rng.integers(1, 9))
        p = rng.normal(size=(m, 9)) + rng.normal(size=9)
        assert np.abs(min_norm_point(p).beta - min_norm_point_bruteforce(p)).max() <= 1e-8


def test_payne_consistency_with_beta():
    b = mu(2)
    ws = weights(b)
    v = np.array([float(b.terms[k]) ** 2 for k in ws.order])
    beta = (v / v.sum()) @ ws.weight_array()
    assert np.abs(beta - min_norm_point(ws.weight_array()).beta).max() <= 1e-10
    # v / sum(v) lies in the affine solution set returned by einstein_system
    es = einstein_system(ws)
    target = [Fraction(int(x)) / int(v.sum()) for x in v]
    diff = [a - b for a, b in zip(target, es.particular)]
    (n,) = es.null_basis
    lam = diff[0] / n[0]
    assert all(d == lam * x for d, x in zip(diff, n))


def test_eigenvalue_type_examples():
    et = eigenvalue_type(BETA)
    assert et == EigenvalueType((1, 2), (6, 3))
    assert str(et) == "(1<2;6,3)"
    assert eigenvalue_type(np.array(BETA, dtype=float) + 1e-13) == et
    assert eigenvalue_type([0, 0]) == NON_INTEGRAL


def test_eigenvalue_type_from_pattern():
    # beta = s(1,1,2) - nu(1,1,1) with nu = |beta|^2: 3nu^2 - (8s+1)nu + 6s^2 = 0,
    # s = 1 gives nu = 1 and beta = (0,0,1)
    assert eigenvalue_type([0, 0, 1]) == EigenvalueType((1, 2), (2, 1))
    assert eigenvalue_type([0.0, 0.0, 1.0]) == EigenvalueType((1, 2), (2, 1))


def test_eigenvalue_type_non_integral():
    assert eigenvalue_type([np.sqrt(2) / 10, -0.1, 0.0]) == NON_INTEGRAL
    assert eigenvalue_type([-0.5, 0.0]) == NON_INTEGRAL
