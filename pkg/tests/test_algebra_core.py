from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from nilsoliton.algebra_core import (Bracket, act, act_infinitesimal, evaluate, inner,
                                     is_derivation, norm2, validate)
from nilsoliton.families import mu, mu_tilde

from conftest import random_bracket, random_orthogonal, rational_brackets


def basis(n, i):
    v = np.zeros(n)
    v[i - 1] = 1
    return v


def test_terms_are_normalized():
    b = Bracket(9, {(5, 4, 7): 1})
    assert b.terms == {(4, 5, 7): -1}
    assert b.coef(5, 4, 7) == 1


@pytest.mark.parametrize("bad", [{(1, 1, 2): 1}, {(1, 2, 4): 1}, {(0, 2, 3): 1}])
def test_bad_terms_rejected(bad):
    with pytest.raises(ValueError):
        Bracket(3, bad)


def test_zero_coefficients_dropped():
    assert len(Bracket(3, {(1, 2, 3): 0})) == 0
    assert len(mu_tilde(0)) == 4


def test_validate_mu1():
    v = validate(mu(1))
    assert (v.jacobi_ok, v.nilpotent, v.step) == (True, True, 2)


def test_validate_zero():
    v = validate(Bracket.zero(9))
    assert (v.jacobi_ok, v.nilpotent, v.step) == (True, True, 1)


def test_validate_not_nilpotent():
    v = validate(Bracket(2, {(1, 2, 1): 1}))
    assert v.jacobi_ok and not v.nilpotent and v.step is None


def test_validate_jacobi_failure():
    # [e1,e2]=e3, [e2,e3]=e1, [e1,e3]=e2 with the wrong sign pattern breaks Jacobi
    b = Bracket(4, {(1, 2, 3): 1, (1, 3, 4): 1, (2, 3, 4): 1, (1, 4, 2): 1})
    assert not validate(b).jacobi_ok


def test_validate_filiform_step():
    b = Bracket(4, {(1, 2, 3): 1, (1, 3, 4): 1})
    v = validate(b)
    assert v.jacobi_ok and v.nilpotent and v.step == 3


def test_evaluate_examples():
    m = mu(2)
    assert np.array_equal(evaluate(m, basis(9, 5), basis(9, 4)), basis(9, 7))
    assert np.array_equal(evaluate(m, basis(9, 4), basis(9, 5)), -basis(9, 7))
    assert np.array_equal(evaluate(m, basis(9, 1), basis(9, 4)), 2 * basis(9, 9))


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(mu(1), np.ones(3), np.ones(9))


def test_act_identity_and_diagonal():
    m = mu(2)
    assert act(np.eye(9, dtype=int).tolist(), m) == m
    g = [[2, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert act(g, Bracket(3, {(1, 2, 3): 1})) == Bracket(3, {(1, 2, 3): Fraction(1, 2)})


def test_act_singular():
    with pytest.raises(ValueError, match="singular"):
        act(np.zeros((3, 3)), Bracket(3, {(1, 2, 3): 1}))


def test_act_is_left_action(rng):
    for _ in range(5):
        b = random_bracket(rng, 5, 6)
        g, h = rng.normal(size=(2, 5, 5))
        assert act(g @ h, b).allclose(act(g, act(h, b)), 1e-10)
        assert act(g, act(np.linalg.inv(g), b)).allclose(b, 1e-10)


def test_act_exact_inverse():
    g = [[1, 2, 0], [0, 1, 0], [Fraction(1, 3), 0, 1]]
    gi = np.linalg.inv(np.array(g, dtype=float))
    b = Bracket(3, {(1, 2, 3): 1})
    back = act(gi, act(g, b))
    assert back.allclose(b, 1e-12)


def test_act_infinitesimal_examples():
    m = mu(2)
    assert act_infinitesimal([1] * 9, m) == m.scaled(-1)
    b = Bracket(3, {(1, 2, 3): 1})
    assert act_infinitesimal([1, 0, 0], b) == Bracket(3, {(1, 2, 3): -1})


def test_act_infinitesimal_finite_difference(rng):
    b = random_bracket(rng, 5, 6)
    alpha = rng.normal(size=5)
    eps = 1e-6
    g = np.diag(np.exp(eps * alpha))
    fd = (act(g, b).to_array() - b.to_array()) / eps
    assert np.abs(fd - act_infinitesimal(alpha, b).to_array()).max() < 1e-4


def test_derivations():
    for t in (0, 1, 2):
        d = [1 + t * t] * 6 + [2 + 2 * t * t] * 3
        assert is_derivation(mu(t), np.diag(d))
        assert is_derivation(mu(t), np.diag([1] * 6 + [2] * 3))
        assert not is_derivation(mu(t), np.eye(9))
    # (1,2,7) has weight 2 - 1 - 1 = 0 too
    assert is_derivation(mu_tilde(2), np.diag([1] * 6 + [2] * 3))
    assert not is_derivation(mu_tilde(2), np.diag([1, 1, 1, 1, 1, 1, 2, 2, 3]))


def test_diagonal_derivation_matches_infinitesimal(rng):
    b = random_bracket(rng, 5, 5)
    a = rng.integers(-2, 3, size=5)
    assert is_derivation(b, np.diag(a)) == act_infinitesimal(a, b).is_zero()


def test_inner_examples():
    for t in (0, 1, 2, 5):
        assert norm2(mu(t)) == 6 * (t * t + 1)
    assert inner(mu(1), Bracket.zero(9)) == 0
    assert norm2(mu_tilde(1)) == 14


def test_inner_orthogonally_invariant(rng):
    a, b = random_bracket(rng, 6, 7), random_bracket(rng, 6, 7)
    q = random_orthogonal(rng, 6)
    assert abs(inner(act(q, a), act(q, b)) - inner(a, b)) < 1e-10


def test_jacobi_preserved_by_action(rng):
    for b in (mu(2), mu_tilde(Fraction(3, 2)), Bracket(4, {(1, 2, 3): 1, (1, 3, 4): 1})):
        g = rng.normal(size=(b.dim, b.dim))
        assert validate(act(g, b)).jacobi_ok


@settings(max_examples=40, deadline=None)
@given(rational_brackets())
def test_exact_action_roundtrip(b):
    n = b.dim
    g = [[Fraction(int(i == j) + (i + 2 * j) % 3, 1 + (i == j)) for j in range(n)] for i in range(n)]
    from nilsoliton._exact import inverse
    gi = inverse(g)
    if gi is None:
        return
    assert act(gi, act(g, b)) == b
