from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from cvilab.curvature_invariants import (
    INVARIANTS,
    UnsupportedInvariant,
    combination,
    evaluate_invariant,
    get_invariant,
    relations_check,
)
from cvilab.exactnum import symbolic_context
from cvilab.field_calculus import GridField, random_trig_field, symbolic_background, torus_background
from cvilab.field_calculus.background import is_zero_scalar

from conftest import ConformallyFlatOracle

x, y = sp.symbols("x y")
PHI_TERMS = {(2, 0): Fraction(1, 4), (1, 1): Fraction(1, 3), (0, 2): Fraction(-1, 5)}
PHI_EXPR = x**2 / 4 + x * y / 3 - y**2 / 5
POINT = (Fraction(1, 3), Fraction(-1, 7))


def exact_bg(n, terms=PHI_TERMS, ncoords=2):
    ctx = symbolic_context(ncoords, [terms])
    return symbolic_background(n, ctx, 0)


@pytest.fixture(scope="module")
def oracle3():
    return ConformallyFlatOracle(PHI_EXPR, (x, y), 3)


def test_second_and_third_order_invariants_match_oracle(oracle3):
    bg = exact_bg(3)
    orc = oracle3
    Q4 = -orc.laplacian(orc.J) - 2 * orc.P_norm_sq + sp.Rational(3, 2) * orc.J**2
    L1 = -orc.laplacian(orc.J**2) + sp.Rational(3 - 6, 3) * orc.J**3
    fp = tuple(map(float, POINT))
    for name, want in (("sigma2", orc.sigma2), ("sigma3", orc.sigma3), ("Q4", Q4), ("L1", L1)):
        assert INVARIANTS[name](bg).evalf(fp) == pytest.approx(orc.value(want, POINT), rel=1e-10), name


def test_v3_equals_sigma3_on_conformally_flat_metrics():
    bg = exact_bg(6)
    assert (INVARIANTS["v3"](bg) - INVARIANTS["sigma3"](bg)).is_zero()


@pytest.mark.parametrize("n", [3, 5, 6, 7])
def test_linear_relations_are_exact(n):
    terms = {(2, 0, 0): Fraction(1, 2), (0, 1, 1): -1, (1, 0, 2): Fraction(1, 3)}
    results = relations_check(exact_bg(n, terms, 3), sample_points=[(1, 2, 3)])
    assert len(results) == 4
    assert all(r.identically_zero for r in results)


def test_relations_on_torus():
    N = 24
    phi = random_trig_field((N, N), 1, np.random.default_rng(0), amplitude=0.1)
    res = relations_check(torus_background(5, (N, N), phi), tol=1e-8)
    assert all(r.identically_zero for r in res), [r.max_abs for r in res]


def test_relations_excluded_dimensions():
    with pytest.raises(UnsupportedInvariant):
        relations_check(exact_bg(4))


@pytest.mark.parametrize("name", sorted(INVARIANTS))
def test_weight_homogeneity(name):
    inv = INVARIANTS[name]
    n = 5
    N = 32
    phi = random_trig_field((N, N), 1, np.random.default_rng(3), amplitude=0.1)
    bg = torus_background(n, (N, N), phi)
    c = 0.25
    scaled = bg.rescale(GridField.constant((N, N), c))
    a, b = inv(scaled), inv(bg)
    err = np.max(np.abs(a.values - np.exp(-2 * inv.k * c) * b.values))
    assert err <= 1e-10 * b.max_abs()


def test_lookup_and_combination():
    assert get_invariant("sigma_2") is INVARIANTS["sigma2"]
    assert get_invariant("sigma4").k == 4
    with pytest.raises(KeyError):
        get_invariant("nope")
    combo = combination([(lambda n: Fraction(n, 2), "J" and INVARIANTS["J"]), (-1, INVARIANTS["J"])], "half n J - J")
    bg = exact_bg(4)
    assert (combo(bg) - INVARIANTS["J"](bg).scale(Fraction(1))).is_zero()
    with pytest.raises(ValueError):
        combination([(1, INVARIANTS["J"]), (1, INVARIANTS["sigma2"])], "mixed")


def test_unsupported_dimension():
    with pytest.raises(UnsupportedInvariant):
        evaluate_invariant("I1", exact_bg(2))


def test_flat_invariants_vanish():
    bg = symbolic_background(6, symbolic_context(2, []))
    for name in INVARIANTS:
        assert is_zero_scalar(INVARIANTS[name](bg)) or INVARIANTS[name](bg).is_zero()
