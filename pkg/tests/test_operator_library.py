from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cvilab import operator_library as ol
from cvilab.exactnum import symbolic_context
from cvilab.field_calculus import random_trig_field, symbolic_background, torus_background

from conftest import ConformallyFlatOracle

x, y = sp.symbols("x y")
UPS = {(2, 0): Fraction(1, 4), (1, 1): Fraction(1, 3), (0, 2): Fraction(-1, 5), (0, 3): Fraction(1, 7), (2, 2): Fraction(1, 6)}
UPS_EXPR = x**2 / 4 + x * y / 3 - y**2 / 5 + y**3 / 7 + x**2 * y**2 / 6


def ctx_inputs():
    ctx = symbolic_context(2, [UPS, {(1, 0): 1}])
    X, Y = ctx.coord(0), ctx.coord(1)
    return ctx, [X * X + Y + 1, ctx.exp((0, 1)) * (X + 2) + Y * Y, X * Y - 1, ctx.exp((0, Fraction(1, 2))) * Y + X]


# -- coefficients ---------------------------------------------------------------


def test_bidegree():
    assert ol.bidegree(2, 1, 3) == (Fraction(1, 3), Fraction(8, 3))
    assert ol.bidegree(1, 1, 6) == (Fraction(2), Fraction(4))
    with pytest.raises(ValueError):
        ol.bidegree(0, 1, 3)


@given(st.fractions(min_value=3, max_value=40, max_denominator=5), st.integers(1, 5))
def test_b_recursion_holds(n, k):
    if n == 2 * k:
        return
    b = ol.b_coeffs(n, k)
    assert b[0] == 0 and len(b) == k + 1
    for j in range(k):
        lhs = Fraction(k + j, 2) * b[j + 1] + (n - 2 * k) * (k + j + 1) / (2 * k) * b[j]
        assert lhs == ol._binom(n - k + j, j)


def test_low_order_b_values():
    for n in range(3, 12):
        assert ol.b_coeffs(n, 1) == [0, 2]
        assert ol.b_coeffs(n, 2)[1:] == [1, 2]


@pytest.mark.parametrize("k", range(1, 7))
def test_trilinear_coefficients_symmetric_and_tangent(k):
    for n in range(2 * k, 2 * k + 7):
        table = ol.trilinear_table(n, k)
        assert ol.trilinear_symmetric(table)
        assert ol.trilinear_tangency_check(n, k, table)


def test_trilinear_low_order_values():
    assert all(v == 1 for n in range(2, 10) for v in ol.trilinear_table(n, 1).values())
    for n in range(4, 12):
        assert ol.trilinear_coeff(n, 2, 0, 1, 1) == Fraction(2 * (n - 4), n + 2)
    # the critical limit keeps only the pure powers
    assert ol.trilinear_table(4, 2) == {(2, 0, 0): 1, (1, 1, 0): 0, (1, 0, 1): 0, (0, 2, 0): 1, (0, 1, 1): 0, (0, 0, 2): 1}


def test_perturbed_table_breaks_tangency():
    table = dict(ol.trilinear_table(7, 2))
    table[(1, 1, 0)] += Fraction(1, 9)
    assert not ol.trilinear_tangency_check(7, 2, table)


def test_coefficient_arguments_validated():
    with pytest.raises(ValueError):
        ol.trilinear_coeff(6, 2, 1, 1, 1)


# -- flat operators ------------------------------------------------------------------


def test_l2_is_negative_laplacian():
    ctx, us = ctx_inputs()
    for n in (3, 5):
        bg = symbolic_background(n, ctx)
        assert (ol.l2k_apply(1, [us[1]], bg) + bg.laplacian(us[1])).is_zero()


@pytest.mark.parametrize("j,k", [(0, 2), (1, 2), (0, 3), (2, 3)])
def test_symmetrization_methods_agree(j, k):
    ctx, us = ctx_inputs()
    bg = symbolic_background(5, ctx)
    ins = (us * 2)[: 2 * k - 1]
    assert (ol.djk_apply(j, k, ins, bg) - ol.djk_apply(j, k, ins, bg, "brute")).is_zero()
    # symmetric in its inputs
    rev = list(reversed(ins))
    assert (ol.djk_apply(j, k, ins, bg) - ol.djk_apply(j, k, rev, bg)).is_zero()


@pytest.mark.parametrize("j,k", [(0, 2), (1, 2), (1, 3), (2, 3)])
def test_diagonal_forms(j, k):
    ctx, us = ctx_inputs()
    bg = symbolic_background(4, ctx)
    u = us[1]
    assert (ol.djk_apply(j, k, [u] * (2 * k - 1), bg) - ol.djk_diagonal(j, k, u, bg)).is_zero()
    if j:
        assert ol.djk_diagonal_identity_check(j, k, u, bg).is_zero()


def test_flat_only_operators_refuse_curved_backgrounds():
    ctx, us = ctx_inputs()
    curved = symbolic_background(5, ctx, 0)
    with pytest.raises(ValueError):
        ol.djk_apply(0, 2, us[:3], curved)
    with pytest.raises(ValueError):
        ol.djk_apply(2, 2, us[:3], symbolic_background(5, ctx))


def test_top_degree_first_order_is_laplacian():
    ctx, us = ctx_inputs()
    bg = symbolic_background(3, ctx)
    assert (ol.top_degree_apply(1, [us[0]], bg) - bg.laplacian(us[0])).is_zero()
    with pytest.raises(ValueError):
        ol.top_degree_apply(2, us[:2], bg)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_fourth_order_assembly_recovers_sigma2(n):
    ctx = symbolic_context(2, [{(2, 0): 1, (1, 1): Fraction(1, 2), (0, 1): -1}])
    assert ol.sigma_assembly_check(2, n, ctx, c=Fraction(1, 2)).is_zero()
    w = ol.l2k_coefficients(n, 2)
    assert not ol.sigma_assembly_check(2, n, ctx, weights=[w[0], w[1] * Fraction(11, 10)]).is_zero()


def test_flat_trilinear_formula_matches_operator():
    ctx, us = ctx_inputs()
    for n in (4, 6):
        bg = symbolic_background(n, ctx)
        for k in (1, 2):
            assert (ol.trilinear_flat_apply(k, us[0], us[1], bg) - ol.covariant_pair_apply(2 * k, us[0], us[1], bg)).is_zero()


# -- covariance --------------------------------------------------------------------


def test_second_order_covariance_against_christoffel_oracle():
    """exp(b Y) D2[exp(2Y) delta](u, v) == D2[delta](exp(aY) u, exp(aY) v), curvature from sympy."""
    n = 3
    a, b = ol.bidegree(2, 1, n)
    a, b = sp.Rational(a.numerator, a.denominator), sp.Rational(b.numerator, b.denominator)
    orc = ConformallyFlatOracle(UPS_EXPR, (x, y), n)
    flat = ConformallyFlatOracle(sp.Integer(0), (x, y), n)
    u, v = x + y**2, 1 + x * y
    coeff = sp.Rational(4 * (n - 2), 3)

    def d2(o, f, g, J):
        return -o.laplacian(f * g) - f * o.laplacian(g) - g * o.laplacian(f) + coeff * J * f * g

    lhs = sp.exp(b * UPS_EXPR) * d2(orc, u, v, orc.J)
    ea = sp.exp(a * UPS_EXPR)
    rhs = d2(flat, ea * u, ea * v, 0)
    for pt in ((Fraction(1, 3), Fraction(-1, 2)), (Fraction(2, 5), Fraction(1, 4))):
        assert orc.value(lhs, pt) == pytest.approx(orc.value(rhs, pt), rel=1e-20)
    # the library operator agrees with the hand-built one on the curved background
    ctx = symbolic_context(2, [UPS])
    X, Y = ctx.coord(0), ctx.coord(1)
    lib = ol.covariant_pair_apply(2, X + Y * Y, 1 + X * Y, symbolic_background(n, ctx, 0))
    want = d2(orc, u, v, orc.J)
    assert lib.evalf((1 / 3, -1 / 2)) == pytest.approx(orc.value(want, (Fraction(1, 3), Fraction(-1, 2))), rel=1e-12)


@pytest.mark.parametrize("n", [3, 5])
def test_second_order_covariance_exact(n):
    ctx, us = ctx_inputs()
    assert ol.covariance_check(ol.d2_op(), 0, us[:2], n, ctx).is_zero()
    assert not ol.covariance_check(ol.d2_op({"J": Fraction(1, 5)}), 0, us[:2], n, ctx).is_zero()


@pytest.mark.parametrize("n", [4, 6])
def test_fourth_order_covariance_exact(n):
    ctx, us = ctx_inputs()
    assert ol.covariance_check(ol.d4_op(), 0, us[:2], n, ctx).is_zero()
    assert not ol.covariance_check(ol.d4_op({"Q4": Fraction(1, 5)}), 0, us[:2], n, ctx).is_zero()


def test_covariance_needs_curved_operator():
    ctx, us = ctx_inputs()
    with pytest.raises(ValueError):
        ol.covariance_check(ol.djk_op(0, 2), 0, us[:3], 5, ctx)


# -- quadrature checks ----------------------------------------------------------------


@pytest.fixture(scope="module")
def torus_fields():
    rng = np.random.default_rng(11)
    return [random_trig_field((24, 24), 1, rng, offset=1.0) for _ in range(6)]


def test_negative_laplacian_pairing_is_dirichlet_energy(torus_fields):
    bg = torus_background(3, (24, 24))
    u = torus_fields[0]
    energy = sum((u.partial(i) * u.partial(i)).integrate() for i in range(2))
    assert ol.pairing_value(ol.neg_laplacian_op(), [u, u], bg) == pytest.approx(energy, rel=1e-12)


@pytest.mark.parametrize("op", [ol.neg_laplacian_op(), ol.djk_op(1, 2), ol.top_degree_op(3), ol.l2k_op(2)], ids=lambda o: o.name)
def test_flat_self_adjointness(op, torus_fields):
    bg = torus_background(5, (24, 24))
    r = ol.selfadjointness_check(op, torus_fields[: op.arity + 1], bg)
    assert r.relative < 1e-10


def test_self_adjointness_detects_a_skew_operator(torus_fields):
    skew = ol.OperatorDescriptor("d/dx", 1, 1, lambda ins, bg: bg.partial(bg.lift(ins[0]), 0))
    r = ol.selfadjointness_check(skew, torus_fields[:2], torus_background(3, (24, 24)))
    assert r.relative > 1e-3


def test_curved_self_adjointness(torus_fields):
    rng = np.random.default_rng(4)
    phi = random_trig_field((24, 24), 1, rng, amplitude=0.1)
    bg = torus_background(5, (24, 24), phi)
    for op in (ol.d2_op(), ol.d4_op()):
        assert ol.selfadjointness_check(op, torus_fields[:3], bg).relative < 1e-6


@pytest.mark.parametrize("j,k", [(0, 2), (1, 2), (1, 3)])
def test_energy_identity(j, k, torus_fields):
    lhs, rhs = ol.djk_energy_sides(j, k, torus_fields[: 2 * k], torus_background(4, (24, 24)))
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_arity_is_enforced():
    ctx, us = ctx_inputs()
    with pytest.raises(ValueError):
        ol.d2_op()(us[:1], symbolic_background(3, ctx))
