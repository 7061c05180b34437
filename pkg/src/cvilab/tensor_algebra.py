"""Symmetric endomorphism algebra over an arbitrary commutative scalar ring.

Matrices are nested lists (``A[i][j]``) whose entries may be rationals,
polynomials, exponential fields, floats or grid fields.  The only
requirements on a scalar are ``+``, ``-``, ``*`` and multiplication by a
:class:`fractions.Fraction` or ``int``.

Production paths use trace recursions; the ``kronecker_*`` functions
contract generalized Kronecker deltas directly and are kept as small-size
oracles.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import reduce
from typing import Sequence

Matrix = list  # list[list[scalar]]


# ---------------------------------------------------------------------------
# generalized Kronecker delta
# ---------------------------------------------------------------------------


def _perm_sign(p: Sequence[int]) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def gen_kronecker(upper: Sequence[int], lower: Sequence[int], n: int) -> int:
    """delta^{upper}_{lower} as the signed sum over permutations of products of deltas."""
    if len(upper) != len(lower):
        raise ValueError("upper and lower index tuples must have equal length")
    k = len(upper)
    if k > n:
        raise ValueError("more indices than the dimension")
    for i in itertools.chain(upper, lower):
        if not 0 <= i < n:
            raise IndexError(f"index {i} out of range for dimension {n}")
    total = 0
    for p in itertools.permutations(range(k)):
        if all(upper[a] == lower[p[a]] for a in range(k)):
            total += _perm_sign(p)
    return total


def _kronecker_fast(upper: Sequence[int], lower: Sequence[int]) -> int:
    """Same value as :func:`gen_kronecker` without the permutation sum."""
    if len(set(upper)) != len(upper) or sorted(upper) != sorted(lower):
        return 0
    pos = {v: i for i, v in enumerate(lower)}
    return _perm_sign([pos[v] for v in upper])


# ---------------------------------------------------------------------------
# generic ring helpers
# ---------------------------------------------------------------------------


def _sum(items, zero=0):
    items = list(items)
    if not items:
        return zero
    return reduce(lambda a, b: a + b, items)


def _scale(c, x):
    """c * x for a rational constant c (kept exact where the ring allows it)."""
    if c == 1:
        return x
    if isinstance(x, float):
        return float(c) * x
    return x * c


def dim(A: Matrix) -> int:
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    return n


def identity(n: int, one=1, zero=0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    if dim(A) != dim(B):
        raise ValueError("dimension mismatch")
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A: Matrix) -> Matrix:
    return [[c * a for a in row] for row in A]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n = dim(A)
    if dim(B) != n:
        raise ValueError("dimension mismatch")
    return [[_sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def trace(A: Matrix):
    return _sum(A[i][i] for i in range(dim(A)))


def trace_of_product(A: Matrix, B: Matrix):
    """tr(AB) without forming the product."""
    n = dim(A)
    return _sum(A[i][k] * B[k][i] for i in range(n) for k in range(n))


def pairing(A: Matrix, B: Matrix):
    """Frobenius pairing <A, B> = sum_ij A_ij B_ij."""
    n = dim(A)
    return _sum(A[i][j] * B[i][j] for i in range(n) for j in range(n))


def is_symmetric(A: Matrix) -> bool:
    n = dim(A)
    return all(A[i][j] == A[j][i] for i in range(n) for j in range(i + 1, n))


def quad_form(A: Matrix, v: Sequence, w: Sequence | None = None):
    """A(v, w) = sum_ij v_i A_ij w_j."""
    w = v if w is None else w
    n = dim(A)
    return _sum(v[i] * A[i][j] * w[j] for i in range(n) for j in range(n))


def apply(A: Matrix, v: Sequence) -> list:
    n = dim(A)
    return [_sum(A[i][j] * v[j] for j in range(n)) for i in range(n)]


# ---------------------------------------------------------------------------
# elementary symmetric functions
# ---------------------------------------------------------------------------


def power_traces(A: Matrix, kmax: int) -> list:
    """[tr A, tr A^2, ..., tr A^kmax]."""
    out = []
    if kmax <= 0:
        return out
    out.append(trace(A))
    P = A
    for i in range(2, kmax + 1):
        if i == kmax:
            out.append(trace_of_product(P, A))
        else:
            P = mat_mul(P, A)
            out.append(trace(P))
    return out


def char_coeffs(A: Matrix, kmax: int | None = None, one=1) -> list:
    """[sigma_0, ..., sigma_kmax] by the Newton identities.

    sigma_k = (1/k) sum_{i=1..k} (-1)^(i-1) sigma_{k-i} tr(A^i).
    Entries with k > n are zero.
    """
    n = dim(A)
    kmax = n if kmax is None else kmax
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    top = min(kmax, n)
    p = power_traces(A, top)
    sig = [one]
    for k in range(1, top + 1):
        acc = None
        for i in range(1, k + 1):
            term = sig[k - i] * p[i - 1]
            if i % 2 == 0:
                term = -term
            acc = term if acc is None else acc + term
        sig.append(_scale(Fraction(1, k), acc))
    sig.extend(0 for _ in range(top + 1, kmax + 1))
    return sig


def sigma_k(A: Matrix, k: int, one=1):
    """k-th elementary symmetric function of the eigenvalues of A.

    By convention sigma_k = 0 for k > n; negative k is an error.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return one
    if k > dim(A):
        return 0
    return char_coeffs(A, k, one)[k]


def newton_tensors(A: Matrix, kmax: int, one=1, zero=0) -> list:
    """[T_0, ..., T_kmax] via T_k = sigma_k I - T_{k-1} A."""
    n = dim(A)
    if not 0 <= kmax:
        raise ValueError("kmax must be nonnegative")
    sig = char_coeffs(A, kmax, one)
    T = [identity(n, one, zero)]
    for k in range(1, kmax + 1):
        TA = mat_mul(T[-1], A)
        T.append(
            [
                [(sig[k] if i == j else zero) - TA[i][j] for j in range(n)]
                for i in range(n)
            ]
        )
    return T


def newton_tensor(A: Matrix, k: int, one=1, zero=0) -> Matrix:
    """k-th Newton tensor T_k(A); requires 0 <= k <= n-1."""
    n = dim(A)
    if not 0 <= k <= n - 1:
        raise ValueError(f"Newton tensor order {k} out of range for dimension {n}")
    return newton_tensors(A, k, one, zero)[k]


# ---------------------------------------------------------------------------
# polarizations
# ---------------------------------------------------------------------------


def _subset_sums(args: Sequence[Matrix]):
    """Yield (|S|, sum_{i in S} A_i) for every nonempty subset S."""
    k = len(args)
    n = dim(args[0])
    for r in range(1, k + 1):
        for S in itertools.combinations(range(k), r):
            M = [[_sum(args[s][i][j] for s in S) for j in range(n)] for i in range(n)]
            yield r, M


def _check_args(args: Sequence[Matrix]) -> int:
    if not args:
        raise ValueError("at least one argument required")
    n = dim(args[0])
    for A in args:
        if dim(A) != n:
            raise ValueError("dimension mismatch among arguments")
    return n


def sigma_polarized(args: Sequence[Matrix], method: str = "newton", one=1):
    """Full polarization sigma_k(A_1, ..., A_k), normalized so that all-equal gives sigma_k(A).

    ``method='newton'`` uses the inclusion-exclusion formula
    (1/k!) sum_S (-1)^(k-|S|) sigma_k(sum_S A); ``method='kronecker'`` contracts
    the generalized Kronecker delta directly (small sizes only).
    """
    n = _check_args(args)
    k = len(args)
    if k > n:
        return 0
    if method == "kronecker":
        return kronecker_sigma(args)
    if method != "newton":
        raise ValueError(f"unknown method {method!r}")
    acc = None
    for r, M in _subset_sums(args):
        v = sigma_k(M, k, one)
        if (k - r) % 2:
            v = -v
        acc = v if acc is None else acc + v
    return _scale(Fraction(1, math.factorial(k)), acc)


def newton_polarized(
    args: Sequence[Matrix], method: str = "newton", one=1, zero=0, strict: bool = True
) -> Matrix:
    """Polarized Newton tensor T_j(A_1, ..., A_j).

    With ``strict=False`` orders j >= n are allowed and return the zero
    matrix (Cayley-Hamilton); this is what a block of a larger zero-padded
    matrix needs.
    """
    if not args:
        raise ValueError("use identity() for the order-zero Newton tensor")
    n = _check_args(args)
    k = len(args)
    if k > n - 1:
        if strict:
            raise ValueError(f"Newton tensor order {k} out of range for dimension {n}")
        return [[zero] * n for _ in range(n)]
    if method == "kronecker":
        return kronecker_newton(args)
    if method != "newton":
        raise ValueError(f"unknown method {method!r}")
    acc = None
    for r, M in _subset_sums(args):
        T = newton_tensor(M, k, one, zero)
        if (k - r) % 2:
            T = [[-x for x in row] for row in T]
        acc = T if acc is None else mat_add(acc, T)
    c = Fraction(1, math.factorial(k))
    return [[_scale(c, x) for x in row] for row in acc]


def sigma_mixed_table(A: Matrix, B: Matrix, k: int, one=1) -> list:
    """[sigma_{k,0}(A,B), ..., sigma_{k,k}(A,B)] (j copies of A, k-j of B).

    Inclusion-exclusion over the multiset {A^j, B^(k-j)}:
    sigma_{k,j} = (1/k!) sum_{p,q} C(j,p) C(k-j,q) (-1)^(k-p-q) sigma_k(pA + qB).
    """
    n = dim(A)
    if dim(B) != n:
        raise ValueError("dimension mismatch")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > n:
        return [0] * (k + 1)
    if k == 0:
        return [one]
    cache = {}

    def sk(p, q):
        if (p, q) not in cache:
            if p == 0 and q == 0:
                cache[(p, q)] = 0
            else:
                M = [[A[i][jj] * p + B[i][jj] * q for jj in range(n)] for i in range(n)]
                cache[(p, q)] = sigma_k(M, k, one)
        return cache[(p, q)]

    out = []
    kf = Fraction(1, math.factorial(k))
    for j in range(k + 1):
        acc = 0
        for p in range(j + 1):
            for q in range(k - j + 1):
                if p == 0 and q == 0:
                    continue
                c = math.comb(j, p) * math.comb(k - j, q)
                if (k - p - q) % 2:
                    c = -c
                acc = acc + sk(p, q) * c
        out.append(_scale(kf, acc))
    return out


def sigma_mixed(A: Matrix, B: Matrix, k: int, j: int, one=1):
    """sigma_{k,j}(A, B): polarized sigma_k at j copies of A and k-j copies of B."""
    if not 0 <= j <= k:
        raise ValueError("require 0 <= j <= k")
    if k > dim(A):
        return 0
    if j == k:
        return sigma_k(A, k, one)
    if j == 0:
        return sigma_k(B, k, one)
    return sigma_mixed_table(A, B, k, one)[j]


# ---------------------------------------------------------------------------
# expansions of sigma_k along a line
# ---------------------------------------------------------------------------


def _powers_of(f, top: int, one=1) -> list:
    out = [one]
    for _ in range(top):
        out.append(out[-1] * f)
    return out


def foil_expand(A: Matrix, B: Matrix, f, k: int, one=1):
    """sum_j C(k, j) f^(k-j) sigma_{k,j}(A, B), which equals sigma_k(A + f B)."""
    table = sigma_mixed_table(A, B, k, one)
    if k > dim(A):
        return 0
    fp = _powers_of(f, k, one)
    return _sum(table[j] * fp[k - j] * math.comb(k, j) for j in range(k + 1))


def foil_identity(A: Matrix, f, k: int, one=1):
    """sigma_k(A + f I) = sum_j C(n-k+j, j) f^j sigma_{k-j}(A)."""
    n = dim(A)
    if k > n:
        return 0
    sig = char_coeffs(A, k, one)
    fp = _powers_of(f, k, one)
    return _sum(sig[k - j] * fp[j] * math.comb(n - k + j, j) for j in range(k + 1))


def foil_rank1(A: Matrix, B: Matrix, f, k: int, one=1):
    """sigma_k(A + f B) = sigma_k(A) + f <T_{k-1}(A), B> for B of rank at most one.

    The rank condition is the caller's responsibility.
    """
    n = dim(A)
    if k > n:
        return 0
    if k == 0:
        return one
    T = newton_tensor(A, k - 1, one)
    return sigma_k(A, k, one) + pairing(T, B) * f


# ---------------------------------------------------------------------------
# direct Kronecker contractions (oracles)
# ---------------------------------------------------------------------------


def kronecker_sigma(args: Sequence[Matrix]):
    """(1/k!) delta^{l_1..l_k}_{i_1..i_k} (A_1)^{i_1}_{l_1} ... (A_k)^{i_k}_{l_k}."""
    n = _check_args(args)
    k = len(args)
    if k == 0:
        return 1
    total = 0
    for lower in itertools.permutations(range(n), k):
        for p in itertools.permutations(range(k)):
            upper = tuple(lower[p[a]] for a in range(k))
            term = _perm_sign(p)
            for a in range(k):
                term = term * args[a][upper[a]][lower[a]]
            total = total + term
    return _scale(Fraction(1, math.factorial(k)), total)


def kronecker_newton(args: Sequence[Matrix]) -> Matrix:
    """(T(A_1..A_k))^l_i = (1/k!) delta^{l l_1..l_k}_{i i_1..i_k} prod (A_a)^{i_a}_{l_a}."""
    n = _check_args(args)
    k = len(args)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for l in range(n):
            total = 0
            for lower in itertools.permutations(range(n), k):
                if l in lower:
                    continue
                full_lower = (l,) + lower
                for upper_rest in itertools.permutations(range(n), k):
                    if i in upper_rest:
                        continue
                    upper = (i,) + upper_rest
                    s = _kronecker_fast(full_lower, upper)
                    if not s:
                        continue
                    term = s
                    for a in range(k):
                        term = term * args[a][upper_rest[a]][lower[a]]
                    total = total + term
            out[i][l] = _scale(Fraction(1, math.factorial(k)), total)
    return out


def kronecker_sigma_mixed(A: Matrix, B: Matrix, k: int, j: int):
    return kronecker_sigma([A] * j + [B] * (k - j))


def cofactor_det(A: Matrix):
    """Determinant by Laplace expansion along the first row."""
    n = dim(A)
    if n == 0:
        return 1
    if n == 1:
        return A[0][0]
    total = 0
    for c in range(n):
        minor = [row[:c] + row[c + 1:] for row in A[1:]]
        term = A[0][c] * cofactor_det(minor)
        total = total - term if c % 2 else total + term
    return total
