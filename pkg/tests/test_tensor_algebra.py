import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cvilab import tensor_algebra as ta

q = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def sym_matrix(draw, n):
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = A[j][i] = draw(q)
    return A


@st.composite
def rank_one(draw, n):
    v = [draw(q) for _ in range(n)]
    return [[a * b for b in v] for a in v]


def charpoly_sigmas(A):
    """sigma_k from the characteristic polynomial det(x I + A) = sum sigma_k x^(n-k)."""
    n = len(A)
    x = sp.Symbol("x")
    M = sp.Matrix(n, n, lambda i, j: sp.Rational(A[i][j].numerator, A[i][j].denominator))
    p = sp.Poly((M + x * sp.eye(n)).det(), x)
    return [Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())][::-1]


def add(A, B, f=1):
    return [[a + f * b for a, b in zip(r, s)] for r, s in zip(A, B)]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@given(data=st.data())
def test_sigma_matches_characteristic_polynomial(n, data):
    A = data.draw(sym_matrix(n))
    want = charpoly_sigmas(A)
    for k in range(n + 1):
        assert ta.sigma_k(A, k) == want[k]
    assert ta.sigma_k(A, n + 1) == 0
    assert ta.cofactor_det(A) == want[n]


def test_gen_kronecker_values():
    assert ta.gen_kronecker((0, 1), (0, 1), 3) == 1
    assert ta.gen_kronecker((0, 1), (1, 0), 3) == -1
    assert ta.gen_kronecker((0, 0), (0, 1), 3) == 0
    assert ta.gen_kronecker((0, 1, 2), (2, 0, 1), 3) == 1


@pytest.mark.parametrize("n", [2, 3])
@given(data=st.data())
def test_newton_tensor_against_kronecker(n, data):
    A = data.draw(sym_matrix(n))
    for k in range(1, n):
        assert ta.newton_tensor(A, k) == ta.kronecker_newton([A] * k)
    # Cayley-Hamilton: T_n(A) = sigma_n I - T_{n-1}(A) A vanishes
    top = add(ta.identity(n, ta.sigma_k(A, n), 0), ta.mat_mul(ta.newton_tensor(A, n - 1), A), -1)
    assert all(x == 0 for row in top for x in row)


@given(data=st.data())
def test_newton_tensor_trace_identity(data):
    n = 4
    A = data.draw(sym_matrix(n))
    for k in range(n):
        assert ta.trace(ta.newton_tensor(A, k)) == (n - k) * ta.sigma_k(A, k)
        assert ta.trace_of_product(ta.newton_tensor(A, k), A) == (k + 1) * ta.sigma_k(A, k + 1)


@given(data=st.data())
def test_polarization_methods_agree_and_are_symmetric(data):
    n = 3
    As = [data.draw(sym_matrix(n)) for _ in range(3)]
    v = ta.sigma_polarized(As)
    assert v == ta.sigma_polarized(As, method="kronecker")
    assert v == ta.sigma_polarized([As[2], As[0], As[1]])
    assert ta.sigma_polarized([As[0]] * 3) == ta.sigma_k(As[0], 3)
    assert ta.newton_polarized(As[:2]) == ta.newton_polarized(As[:2], method="kronecker")


@given(data=st.data())
def test_polarization_is_multilinear(data):
    n = 3
    A, B, C = (data.draw(sym_matrix(n)) for _ in range(3))
    c = data.draw(q)
    lhs = ta.sigma_polarized([add(A, B, c), C])
    assert lhs == ta.sigma_polarized([A, C]) + c * ta.sigma_polarized([B, C])


def test_newton_polarized_out_of_range():
    A = [[Fraction(1), 0], [0, Fraction(2)]]
    with pytest.raises(ValueError):
        ta.newton_polarized([A, A])
    assert ta.newton_polarized([A, A], strict=False) == [[0, 0], [0, 0]]


@pytest.mark.parametrize("n", [2, 3, 4])
@given(data=st.data())
def test_line_expansions_match_direct_sigma(n, data):
    A = data.draw(sym_matrix(n))
    B = data.draw(sym_matrix(n))
    R = data.draw(rank_one(n))
    f = data.draw(q)
    I = ta.identity(n, Fraction(1), Fraction(0))
    for k in range(n + 2):
        assert ta.foil_expand(A, B, f, k) == ta.sigma_k(add(A, B, f), k)
        assert ta.foil_identity(A, f, k) == ta.sigma_k(add(A, I, f), k)
        assert ta.foil_rank1(A, R, f, k) == ta.sigma_k(add(A, R, f), k)


@given(data=st.data())
def test_mixed_table_endpoints(data):
    A, B = data.draw(sym_matrix(3)), data.draw(sym_matrix(3))
    for k in range(4):
        tab = ta.sigma_mixed_table(A, B, k)
        assert tab[0] == ta.sigma_k(B, k) and tab[-1] == ta.sigma_k(A, k)
        for j in range(k + 1 if k else 0):
            assert ta.sigma_mixed(A, B, k, j) == ta.kronecker_sigma_mixed(A, B, k, j)


def test_works_over_floats():
    A = [[0.5, 0.25], [0.25, -1.0]]
    assert ta.sigma_k(A, 2) == pytest.approx(0.5 * -1.0 - 0.25**2)
    assert math.isclose(ta.sigma_k(A, 1), -0.5)
