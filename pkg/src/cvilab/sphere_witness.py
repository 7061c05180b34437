"""Closed form of sigma_k along the conformal family of the round sphere.

With ``x`` a first spherical harmonic on S^{2k} (so Hess x = -x g and
|dx|^2 = 1 - x^2), the Schouten tensor of exp(2 t x) g_0, rescaled by the
weight, is the endomorphism

    c I + 2 t^2 R,   c = 1 + 2tx - t^2 + t^2 x^2,   tr R = 1 - x^2,  rank R = 1,

up to an overall factor 1/2.  Everything is a polynomial in (t, x).
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import tensor_algebra as ta
from .exactnum import MultiPoly, PolySpace

SPACE = PolySpace(0, ("t", "x"))


def _tx():
    return SPACE.param("t"), SPACE.param("x")


def sphere_endomorphism(k: int) -> tuple[MultiPoly, list]:
    """(c, R) in dimension 2k, R = diag(1 - x^2, 0, ..., 0)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    t, x = _tx()
    one = SPACE.const(1)
    c = one + t * x * 2 - t * t + t * t * x * x
    n = 2 * k
    R = [[SPACE.zero() for _ in range(n)] for _ in range(n)]
    R[0][0] = one - x * x
    return c, R


def sphere_family_poly(k: int) -> MultiPoly:
    """2^{-k} sigma_k(c I + 2 t^2 R) computed through the rank-one and identity expansions."""
    c, R = sphere_endomorphism(k)
    n = 2 * k
    t, _ = _tx()
    one = SPACE.const(1)
    cI = [[c if i == j else SPACE.zero() for j in range(n)] for i in range(n)]
    zero = [[SPACE.zero() for _ in range(n)] for _ in range(n)]
    # rank-one expansion around c I, whose sigma_k comes from the identity expansion
    base = ta.foil_identity(zero, c, k, one)
    T = ta.newton_tensor(cI, k - 1, one)
    val = base + ta.pairing(T, R) * (t * t * 2)
    return val.scale(Fraction(1, 2**k))


def sphere_closed_form(k: int, binom_scale: Fraction | int = 1) -> MultiPoly:
    """2^{1-k} C(2k-1, k-1) (1 + 2tx) (1 + 2tx - t^2 + t^2 x^2)^{k-1}."""
    t, x = _tx()
    c, _ = sphere_endomorphism(k)
    one = SPACE.const(1)
    const = Fraction(math.comb(2 * k - 1, k - 1), 2 ** (k - 1)) * Fraction(binom_scale)
    return ((one + t * x * 2) * c ** (k - 1)).scale(const)


def sphere_identity_check(k: int, binom_scale: Fraction | int = 1) -> bool:
    """Exact equality with the closed form, t-degree 2k-1 and a nonzero leading t-coefficient."""
    lhs = sphere_family_poly(k)
    rhs = sphere_closed_form(k, binom_scale)
    if (lhs - rhs).is_zero():
        deg = lhs.degree_in("t")
        return deg == 2 * k - 1 and not lhs.coeff_in("t", deg).is_zero()
    return False


def t_derivative_nonzero(k: int) -> list[bool]:
    """For j = 0..2k: whether the j-th t-derivative at t = 0 is a nonzero polynomial in x."""
    p = sphere_family_poly(k)
    return [not p.coeff_in("t", j).is_zero() for j in range(2 * k + 1)]
