from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvilab import conformal_variation as cv
from cvilab import operator_library as ol
from cvilab.curvature_invariants import INVARIANTS
from cvilab.exactnum import SurvivingBucketError
from cvilab.field_calculus import random_trig_field, symbolic_background, torus_background
from cvilab.field_calculus.background import is_zero_scalar

DIR = {(2, 0): 1, (1, 1): Fraction(-1, 2), (0, 3): Fraction(1, 3), (2, 2): Fraction(1, 4)}
BASE = {(1, 1): Fraction(1, 2), (0, 2): Fraction(1, 3)}


def test_vandermonde_inverse_is_exact():
    nodes = cv.TORUS_NODES[:6]
    Vinv = cv.vandermonde_inverse(nodes)
    for i, x in enumerate(nodes):
        for r in range(len(nodes)):
            assert sum(x**j * Vinv[j][r] for j in range(len(nodes))) == (i == r)
    with pytest.raises(ValueError):
        cv.vandermonde_inverse([Fraction(1), Fraction(1)])


def test_flat_jet_of_J_by_hand():
    # J(exp(2tY) delta) = -exp(-2tY) (t Lap Y + (n-2)/2 t^2 |dY|^2)
    n = 5
    ctx = cv.jet_context(2, [DIR])
    jet = cv.conformal_jet("J", "tY", symbolic_background(n, ctx))
    red = jet.coeffs[1].ctx
    Y = red.poly(red.space.from_terms({(2, 0, 0): 1, (1, 1, 0): Fraction(-1, 2), (0, 3, 0): Fraction(1, 3), (2, 2, 0): Fraction(1, 4)}))
    lap = Y.partial(0).partial(0) + Y.partial(1).partial(1)
    grad2 = Y.partial(0) * Y.partial(0) + Y.partial(1) * Y.partial(1)
    assert jet.degree == 2
    assert is_zero_scalar(jet.coeffs[0])
    assert (jet.coeffs[1] + lap).is_zero()
    assert (jet.coeffs[2] + grad2.scale(Fraction(n - 2, 2))).is_zero()


@pytest.mark.parametrize("name,n", [("sigma2", 5), ("Q4", 4), ("I1", 6)])
def test_jet_matches_direct_evaluation(name, n):
    ctx = cv.jet_context(2, [DIR], [BASE], plain=True)
    bg = symbolic_background(n, ctx, "phi0")
    for t in (Fraction(2, 3), Fraction(-1, 2)):
        assert cv.jet_consistency(name, bg, t)


def test_surviving_bucket_is_reported():
    # without the weight the exp(t Y) buckets cannot cancel
    ctx = cv.jet_context(2, [DIR])
    J = INVARIANTS["J"].evaluate(symbolic_background(3, ctx, "tY"))
    with pytest.raises(SurvivingBucketError):
        J.coeff_in_param("t", 1)


def test_torus_jet_is_the_rescaled_family():
    N = 24
    rng = np.random.default_rng(7)
    bg = torus_background(4, (N, N), random_trig_field((N, N), 1, rng, amplitude=0.1))
    Y = random_trig_field((N, N), 1, rng, amplitude=0.15)
    jet = cv.conformal_jet("sigma2", Y, bg)
    assert jet.fit_residual < 1e-8
    t = 0.3
    direct = (Y * (4 * t)).exp() * INVARIANTS["sigma2"].evaluate(bg.rescale(Y, Fraction(3, 10)))
    assert np.max(np.abs(jet(Fraction(3, 10)).values - direct.values)) < 1e-9 * direct.max_abs()


@pytest.mark.parametrize("name,n", [("J", 3), ("sigma2", 5), ("sigma3", 6), ("I1", 6), ("L2", 6)])
def test_linearization_kills_constants(name, n):
    assert cv.linearization_of_one_is_zero(name, n)


@pytest.mark.parametrize("name,n", [("J", 3), ("sigma2", 5), ("L1", 5)])
def test_linearization_is_symmetric(name, n):
    N = 32
    rng = np.random.default_rng(2)
    phi, u, v = (random_trig_field((N, N), 1, rng, amplitude=0.1) for _ in range(3))
    bg = torus_background(n, (N, N), phi)
    r = cv.linearization_selfadjoint_check(name, bg, u, v)
    assert r.relative < 1e-7
    assert r.s_of_one < 1e-10 * INVARIANTS[name].evaluate(bg).max_abs()


@pytest.mark.parametrize("name,n,ell", [("sigma2", 5, 3), ("J", 3, 1), ("J", 5, 2), ("sigma3", 7, 5)])
def test_first_operator_at_constants(name, n, ell):
    assert cv.l1ell_check(name, ell, cv.l1ell_background(n)).is_zero()


@pytest.mark.parametrize("n", [3, 5])
def test_recovery_of_invariants(n):
    ctx = cv.jet_context(2, [DIR])
    ops = {"D2": ol.d2_op(), "D4": ol.d4_op(), "L4": ol.l2k_op(2), "L6": ol.l2k_op(3)}
    for key, (inv, ell) in cv.recovery_targets(n).items():
        assert cv.recovery_check(ops[key], inv, ell, n, "tY", ctx).is_zero(), key


def test_second_coefficient_polarizes():
    a = {(2, 0): 1, (0, 1): Fraction(1, 2), (2, 2): Fraction(1, 5)}
    b = {(1, 1): 1, (0, 2): -1, (3, 1): Fraction(1, 6)}
    assert cv.mixed_jet_symmetry("sigma2", a, b, 4, 2) == (True, True)


def test_diagonal_operator_only_in_critical_dimension():
    ctx = cv.jet_context(2, [DIR])
    jet = cv.conformal_jet("sigma2", "tY", symbolic_background(5, ctx))
    with pytest.raises(ValueError):
        jet.diagonal_operator(1)
    crit = cv.conformal_jet("sigma2", "tY", symbolic_background(4, ctx))
    assert (crit.diagonal_operator(2) - crit.coeffs[2].scale(2)).is_zero()


# -- rank ---------------------------------------------------------------------


def test_family_enumeration():
    full = cv.sample_family(3, None)
    assert len(full) == 3**9 - 1
    assert all(d for d in full)
    reps = cv.orbit_representatives(full, 3)
    assert len(reps) == 321
    # orbits partition the family
    assert sum(len(cv._orbit(d, 3)) for d in reps) == len(full)


@given(st.integers(1, 30), st.integers(0, 1000))
def test_sampled_family_is_seeded_and_distinct(size, seed):
    a = cv.sample_family(3, size, seed)
    assert a == cv.sample_family(3, size, seed)
    assert len({tuple(sorted(d.items())) for d in a}) == len(a) == size


def test_rank_on_a_small_family():
    fam = cv.sample_family(3, 12, seed=1)
    r = cv.rank_witness("sigma2", 4, fam)
    assert r.rank == 4 and r.witness_degree == 3
    assert all(j in r.certified_zero for j in range(4, r.max_degree_seen + 1))
    with pytest.raises(ValueError):
        cv.rank_witness("sigma2", 5, fam)


def test_symmetry_reduction_does_not_change_the_answer():
    fam = cv.sample_family(2, None)
    a = cv.rank_witness("sigma2", 4, fam, nvars=2)
    b = cv.rank_witness("sigma2", 4, fam, nvars=2, use_symmetry=False)
    assert (a.certified_zero, a.witness_degree) == (b.certified_zero, b.witness_degree)
    assert a.evaluated < b.evaluated


# -- primitive ------------------------------------------------------------------


def test_primitive_is_path_independent():
    N = 16
    rng = np.random.default_rng(3)
    bg = torus_background(4, (N, N), random_trig_field((N, N), 1, rng, amplitude=0.1))
    u = random_trig_field((N, N), 1, rng, amplitude=0.2)
    vals = [cv.conformal_primitive("sigma2", u, bg, m) for m in ("closed", "linear", "smoothstep")]
    assert max(vals) - min(vals) <= 1e-8 * max(abs(v) for v in vals)


def test_primitive_needs_critical_dimension():
    N = 8
    bg = torus_background(5, (N, N))
    with pytest.raises(ValueError):
        cv.conformal_primitive("sigma2", random_trig_field((N, N), 1, np.random.default_rng(0)), bg)
