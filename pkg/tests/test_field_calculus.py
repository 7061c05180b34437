from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cvilab.exactnum import symbolic_context
from cvilab.field_calculus import (
    AliasingError,
    GridField,
    coordinate_field,
    random_trig_field,
    symbolic_background,
    torus_background,
    trig_mode,
)

from cvilab.field_calculus.background import is_zero_scalar

from conftest import ConformallyFlatOracle

x, y = sp.symbols("x y")
PHI_TERMS = {(2, 0): Fraction(1, 3), (1, 1): Fraction(-1, 2), (0, 3): Fraction(1, 5)}
PHI_EXPR = x**2 / 3 - x * y / 2 + y**3 / 5
POINTS = [(Fraction(1, 5), Fraction(-1, 3)), (Fraction(-1, 2), Fraction(1, 4))]


def symbolic_bg(n):
    ctx = symbolic_context(2, [PHI_TERMS])
    return ctx, symbolic_background(n, ctx, 0)


# -- grid fields ------------------------------------------------------------


@given(st.integers(-5, 5), st.integers(-5, 5), st.floats(0, 6.28))
def test_spectral_derivative_of_a_mode_is_exact(f0, f1, phase):
    N = 16
    u = trig_mode((N, N), (f0, f1), phase)
    want = coordinate_field((N, N), lambda a, b: -2 * np.pi * f0 * np.sin(2 * np.pi * (f0 * a + f1 * b) + phase))
    assert np.max(np.abs(u.partial(0).values - want.values)) < 1e-11


def test_trapezoidal_mean_is_exact_for_band_limited_products():
    N = 12
    u = trig_mode((N, N), (3, -2), 0.4)
    assert (u * u).integrate() == pytest.approx(0.5, abs=1e-14)
    assert u.integrate() == pytest.approx(0.0, abs=1e-14)


def test_aliasing_guard():
    u = trig_mode((8,), (3,))
    with pytest.raises(AliasingError):
        (u * u).partial(0)
    # unknown band: the guard inspects the spectrum
    v = GridField(np.exp(np.cos(2 * np.pi * np.arange(8) / 8) * 4))
    with pytest.raises(AliasingError):
        v.partial(0)


def test_random_fields_are_seeded_and_band_limited():
    a = random_trig_field((10, 10), 2, np.random.default_rng(5))
    b = random_trig_field((10, 10), 2, np.random.default_rng(5))
    assert np.array_equal(a.values, b.values) and a.band == (2, 2)
    amps = np.abs(np.fft.fft2(a.values))
    assert amps[3:8, :].max() < 1e-10


def test_inactive_axes_have_zero_derivative():
    u = random_trig_field((8, 1), 2, np.random.default_rng(0))
    assert u.partial(1).is_zero()


# -- curvature against Christoffel symbols --------------------------------------


@pytest.mark.parametrize("n", [3, 4])
def test_symbolic_curvature_matches_christoffel_oracle(n):
    ctx, bg = symbolic_bg(n)
    orc = ConformallyFlatOracle(PHI_EXPR, (x, y), n)
    for pt in POINTS:
        fp = tuple(float(c) for c in pt)
        assert bg.J().evalf(fp) == pytest.approx(orc.value(orc.J, pt), rel=1e-12)
        assert bg.sigma_P(2).evalf(fp) == pytest.approx(orc.value(orc.sigma2, pt), rel=1e-12)
        assert bg.P_norm_sq().evalf(fp) == pytest.approx(orc.value(orc.P_norm_sq, pt), rel=1e-12)


def test_symbolic_laplacian_matches_oracle():
    n = 5
    ctx, bg = symbolic_bg(n)
    f = ctx.poly(ctx.space.from_terms({(1, 2): 2, (3, 0): -1}))
    orc = ConformallyFlatOracle(PHI_EXPR, (x, y), n)
    lap = orc.laplacian(2 * x * y**2 - x**3)
    for pt in POINTS:
        assert bg.laplacian(f).evalf(tuple(map(float, pt))) == pytest.approx(orc.value(lap, pt), rel=1e-12)


def test_torus_curvature_matches_oracle():
    n, N = 4, 16
    phi_expr = sp.Rational(1, 10) * sp.cos(2 * sp.pi * x) + sp.Rational(1, 20) * sp.sin(2 * sp.pi * (x + y))
    phi = trig_mode((N, N), (1, 0), 0, 0.1) + trig_mode((N, N), (1, 1), -np.pi / 2, 0.05)
    bg = torus_background(n, (N, N), phi)
    orc = ConformallyFlatOracle(phi_expr, (x, y), n)
    zs = sp.symbols(f"z0:{n - 2}")
    J = sp.lambdify((x, y), orc.J.subs({z: 0 for z in zs}), "numpy")
    s2 = sp.lambdify((x, y), orc.sigma2.subs({z: 0 for z in zs}), "numpy")
    X, Y = np.meshgrid(np.arange(N) / N, np.arange(N) / N, indexing="ij")
    assert np.max(np.abs(bg.J().values - J(X, Y))) < 1e-10
    assert np.max(np.abs(bg.sigma_P(2).values - s2(X, Y))) < 1e-10


def test_constant_rescaling_scales_J():
    N = 16
    phi = random_trig_field((N, N), 1, np.random.default_rng(1), amplitude=0.2)
    bg = torus_background(5, (N, N), phi)
    c = 0.3
    scaled = bg.rescale(GridField.constant((N, N), c))
    assert np.allclose(scaled.J().values, np.exp(-2 * c) * bg.J().values, atol=1e-13)


def test_rescaling_composes():
    N = 16
    rng = np.random.default_rng(2)
    phi, u, v = (random_trig_field((N, N), 1, rng, amplitude=0.1) for _ in range(3))
    bg = torus_background(3, (N, N), phi)
    a = bg.rescale(u).rescale(v).J().values
    b = bg.rescale(u + v).J().values
    assert np.max(np.abs(a - b)) < 1e-12


def test_flat_background_has_no_curvature():
    ctx = symbolic_context(2, [])
    bg = symbolic_background(3, ctx)
    assert bg.flat
    assert is_zero_scalar(bg.J())


def test_dimension_must_hold_the_active_axes():
    with pytest.raises(ValueError):
        torus_background(1, (4, 4))
