import itertools
import math
from fractions import Fraction

import pytest
import sympy as sp

from cvilab import sphere_witness as sw

from conftest import to_sympy

t, x = sp.symbols("t x")


def eigen_sigma(k):
    """2^{-k} e_k of the eigenvalues of c I + 2 t^2 diag(1 - x^2, 0, ...)."""
    c = 1 + 2 * t * x - t**2 + t**2 * x**2
    eig = [c + 2 * t**2 * (1 - x**2)] + [c] * (2 * k - 1)
    e = sum(sp.Mul(*combo) for combo in itertools.combinations(eig, k))
    return sp.expand(e / 2**k)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_family_matches_eigenvalue_oracle(k):
    assert sp.expand(to_sympy(sw.sphere_family_poly(k), (t, x)) - eigen_sigma(k)) == 0


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_closed_form(k):
    assert sw.sphere_identity_check(k)
    assert sw.sphere_family_poly(k).degree_in("t") == 2 * k - 1


@pytest.mark.parametrize("k", [2, 3])
def test_mutated_constant_fails(k):
    assert not sw.sphere_identity_check(k, Fraction(math.comb(2 * k - 1, k) + 1, math.comb(2 * k - 1, k - 1)))


def test_closed_form_oracle_k2():
    want = sp.Rational(3, 2) * (1 + 2 * t * x) * (1 + 2 * t * x - t**2 + t**2 * x**2)
    assert sp.expand(to_sympy(sw.sphere_closed_form(2), (t, x)) - want) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_derivatives_vanish_only_at_top_order(k):
    pattern = sw.t_derivative_nonzero(k)
    assert pattern[: 2 * k] == [True] * (2 * k)
    assert pattern[2 * k] is False


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        sw.sphere_endomorphism(0)
