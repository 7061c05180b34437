"""Explicit polydifferential operators and generic checkers for them.

Contents:

* coefficient tables: the ``b_j`` recursion and the trilinear-family
  coefficients ``a_{r,s,t}`` (with their tangency recurrence);
* flat operators built from Hessians of products: ``D_j^k`` (symmetrized
  and diagonal), the assembled ``L_{2k}``, the odd top-degree operator;
* the curved bilinear operators ``D_2`` and ``D_4``;
* checkers: conformal covariance (exact), self-adjointness and the
  Dirichlet-energy identity (quadrature).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import tensor_algebra as ta
from .curvature_invariants import INVARIANTS, sigma2
from .exactnum import rational
from .field_calculus import ConfBackground
from .field_calculus.background import _cscale, _sum, is_zero_scalar
from .field_calculus.grid import GridField

F = Fraction


class PoleError(ArithmeticError):
    """Coefficient formula diverges at the requested parameters."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(rational(x)))


def _c(c, x):
    return _cscale(_frac(c), x)


def _plus(*terms):
    return _sum(t for t in terms if not is_zero_scalar(t))


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def bidegree(ell: int, k: int, n) -> tuple[Fraction, Fraction]:
    """(a, b) with a = (n-2k)/(l+1), b = (n l + 2k)/(l+1)."""
    if ell < 1:
        raise ValueError("arity must be at least 1")
    n = _frac(n)
    return (n - 2 * k) / (ell + 1), (n * ell + 2 * k) / (ell + 1)


# ---------------------------------------------------------------------------
# b_j recursion
# ---------------------------------------------------------------------------


def _binom(top: Fraction, j: int) -> Fraction:
    """Generalized binomial C(top, j) for rational top."""
    out = Fraction(1)
    for i in range(j):
        out = out * (top - i) / (i + 1)
    return out


def b_coeffs(n, k: int) -> list[Fraction]:
    """[b_0, ..., b_k] solving (k+j)/2 b_{j+1} + (n-2k)(k+j+1)/(2k) b_j = C(n-k+j, j), b_0 = 0."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = _frac(n)
    b = [Fraction(0)]
    for j in range(k):
        rhs = _binom(n - k + j, j) - (n - 2 * k) * (k + j + 1) / (2 * k) * b[j]
        b.append(rhs / Fraction(k + j, 2))
    return b


# ---------------------------------------------------------------------------
# trilinear-family coefficients a_{r,s,t}
# ---------------------------------------------------------------------------


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _rising_eps(c: Fraction, m: int) -> list:
    """(c + eps)_m as a polynomial in eps."""
    out = [Fraction(1)]
    for i in range(m):
        out = _poly_mul(out, [c + i, Fraction(1)])
    return out


def _order(p: list) -> int:
    for i, x in enumerate(p):
        if x:
            return i
    return len(p)


def trilinear_coeff(n, k: int, r: int, s: int, t: int) -> Fraction:
    """a_{r,s,t} = k!/(r!s!t!) (c)_{k-r}(c)_{k-s}(c)_{k-t} / ((c)_k)^2 with c = (n-2k)/6.

    When ``c`` is a nonpositive integer the value is taken as the limit
    ``c -> c + eps``; a genuinely divergent limit raises :class:`PoleError`.
    """
    if min(r, s, t) < 0 or r + s + t != k:
        raise ValueError("require r, s, t >= 0 with r + s + t = k")
    c = (_frac(n) - 2 * k) / 6
    lead = Fraction(math.factorial(k), math.factorial(r) * math.factorial(s) * math.factorial(t))
    if c.denominator != 1 or c > 0:
        num = Fraction(1)
        for x in (r, s, t):
            num *= _rising_value(c, k - x)
        den = _rising_value(c, k) ** 2
        return lead * num / den
    num = [Fraction(1)]
    for x in (r, s, t):
        num = _poly_mul(num, _rising_eps(c, k - x))
    den = _rising_eps(c, k)
    den = _poly_mul(den, den)
    on, od = _order(num), _order(den)
    if on < od:
        raise PoleError(f"a_({r},{s},{t}) diverges at n = {n}, k = {k}")
    if on > od:
        return Fraction(0)
    return lead * num[on] / den[od]


def _rising_value(c: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(m):
        out *= c + i
    return out


def trilinear_table(n, k: int) -> dict:
    """All a_{r,s,t} with r + s + t = k."""
    return {
        (r, s, k - r - s): trilinear_coeff(n, k, r, s, k - r - s)
        for r in range(k + 1)
        for s in range(k + 1 - r)
    }


def trilinear_symmetric(table: dict) -> bool:
    return all(
        table[tuple(p)] == v for key, v in table.items() for p in itertools.permutations(key)
    )


def trilinear_tangency_check(n, k: int, table: dict | None = None) -> bool:
    """(s+1)(N-2s-2) a_{r,s+1,t} == (r+1)(N-2r-2) a_{r+1,s,t} for all r+s+t = k-1, N = (n+4k)/3."""
    table = trilinear_table(n, k) if table is None else table
    N = (_frac(n) + 4 * k) / 3
    for r in range(k):
        for s in range(k - r):
            t = k - 1 - r - s
            lhs = (s + 1) * (N - 2 * s - 2) * table[(r, s + 1, t)]
            rhs = (r + 1) * (N - 2 * r - 2) * table[(r + 1, s, t)]
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# Hessian-of-products helpers (flat backgrounds)
# ---------------------------------------------------------------------------


def _require_flat(bg: ConfBackground, what: str):
    if not bg.flat:
        raise ValueError(f"{what} is only defined on flat backgrounds")


class _PairCache:
    """Products, Hessians of products and gradient pairings of input pairs."""

    def __init__(self, bg: ConfBackground, inputs: Sequence):
        self.bg = bg
        self.u = [bg.lift(x) for x in inputs]
        self._grad: dict = {}
        self._hess: dict = {}
        self._dot: dict = {}
        self._sig: dict = {}
        self._newt: dict = {}
        self._N: dict = {}

    def grad(self, i):
        if i not in self._grad:
            self._grad[i] = self.bg.grad(self.u[i])
        return self._grad[i]

    def hess(self, pair):
        pair = tuple(sorted(pair))
        if pair not in self._hess:
            a, b = pair
            self._hess[pair] = self.bg.flat_hessian(self.u[a] * self.u[b]).block
        return self._hess[pair]

    def dot(self, pair):
        pair = tuple(sorted(pair))
        if pair not in self._dot:
            a, b = pair
            self._dot[pair] = self.bg.flat_inner(self.grad(a), self.grad(b))
        return self._dot[pair]

    @staticmethod
    def _key(pairs):
        return tuple(sorted(tuple(sorted(p)) for p in pairs))

    def N(self, pairs):
        key = self._key(pairs)
        if key not in self._N:
            val = 1
            for p in key:
                val = _times(val, self.dot(p))
            self._N[key] = val
        return self._N[key]

    def sigma(self, pairs):
        """Polarized sigma_j of the Hessians of the pair products."""
        key = self._key(pairs)
        if key not in self._sig:
            if not key:
                self._sig[key] = 1
            else:
                self._sig[key] = ta.sigma_polarized([self.hess(p) for p in key])
        return self._sig[key]

    def newton(self, pairs):
        """Polarized Newton tensor (active block) of the pair-product Hessians."""
        key = self._key(pairs)
        if key not in self._newt:
            m = self.bg.m
            if not key:
                self._newt[key] = ta.identity(m)
            else:
                self._newt[key] = ta.newton_polarized([self.hess(p) for p in key], strict=False)
        return self._newt[key]


def _times(a, b):
    """Product that treats the integer 1 as a unit."""
    if isinstance(a, int) and a == 1:
        return b
    if isinstance(b, int) and b == 1:
        return a
    return a * b


def _perfect_matchings(items: Sequence[int]):
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for idx in range(1, len(items)):
        rest = items[1:idx] + items[idx + 1:]
        for m in _perfect_matchings(rest):
            yield [(first, items[idx])] + m


def _grad_of(bg, f):
    if isinstance(f, int):
        return [0] * bg.m
    return bg.grad(f)


# ---------------------------------------------------------------------------
# D_j^k
# ---------------------------------------------------------------------------


def _djk_check(j: int, k: int, nin: int):
    if k < 1 or not 0 <= j <= k - 1:
        raise ValueError("require k >= 1 and 0 <= j <= k-1")
    if nin != 2 * k - 1:
        raise ValueError(f"D_j^k takes {2 * k - 1} inputs, got {nin}")


def _djk_term1(pc: _PairCache, single, t_pairs, n_pairs, k, j):
    """(u_s/(k-j)) delta(T_{j-1}(t_pairs)(grad N_{k-j}(n_pairs)))."""
    bg = pc.bg
    gN = _grad_of(bg, pc.N(n_pairs))
    T = pc.newton(t_pairs)
    omega = ta.apply(T, gN) if bg.m else []
    return _c(Fraction(1, k - j), pc.u[single] * bg.flat_divergence(omega))


def _djk_term2(pc: _PairCache, single, n_pairs, s_pairs):
    """-delta(N_{k-j-1}(n_pairs) sigma_j(s_pairs) du_s)."""
    bg = pc.bg
    coef = pc.N(n_pairs)
    sig = pc.sigma(s_pairs)
    if is_zero_scalar(sig):
        return 0
    coef = _times(coef, sig)
    du = pc.grad(single)
    return -bg.flat_divergence([coef * x for x in du])


def djk_apply(j: int, k: int, inputs: Sequence, bg: ConfBackground, method: str = "coalesced"):
    """Fully symmetrized D_j^k(u_1, ..., u_{2k-1}) on a flat background.

    ``method='coalesced'`` sums over distinct pair structures with their
    multiplicities; ``method='brute'`` runs over all (2k-1)! permutations.
    """
    _djk_check(j, k, len(inputs))
    _require_flat(bg, "D_j^k")
    pc = _PairCache(bg, inputs)
    nin = 2 * k - 1
    total = []
    if method == "brute":
        for perm in itertools.permutations(range(nin)):
            if j >= 1:
                single = perm[0]
                t_pairs = [(perm[1 + 2 * i], perm[2 + 2 * i]) for i in range(j - 1)]
                rest = perm[2 * j - 1:]
                n_pairs = [(rest[2 * i], rest[2 * i + 1]) for i in range(k - j)]
                total.append(_djk_term1(pc, single, t_pairs, n_pairs, k, j))
            n_pairs = [(perm[2 * i], perm[2 * i + 1]) for i in range(k - j - 1)]
            s0 = 2 * (k - j - 1)
            s_pairs = [(perm[s0 + 2 * i], perm[s0 + 2 * i + 1]) for i in range(j)]
            total.append(_djk_term2(pc, perm[-1], n_pairs, s_pairs))
        return _c(Fraction(1, math.factorial(nin)), _plus(*total))
    if method != "coalesced":
        raise ValueError(f"unknown method {method!r}")
    for single in range(nin):
        rest = [i for i in range(nin) if i != single]
        for matching in _perfect_matchings(rest):
            idx = range(k - 1)
            if j >= 1:
                mult = 2 ** (k - 1) * math.factorial(j - 1) * math.factorial(k - j)
                for chosen in itertools.combinations(idx, j - 1):
                    t_pairs = [matching[i] for i in chosen]
                    n_pairs = [matching[i] for i in idx if i not in chosen]
                    total.append(_c(mult, _djk_term1(pc, single, t_pairs, n_pairs, k, j)))
            mult = 2 ** (k - 1) * math.factorial(j) * math.factorial(k - j - 1)
            for chosen in itertools.combinations(idx, j):
                s_pairs = [matching[i] for i in chosen]
                n_pairs = [matching[i] for i in idx if i not in chosen]
                total.append(_c(mult, _djk_term2(pc, single, n_pairs, s_pairs)))
    return _c(Fraction(1, math.factorial(nin)), _plus(*total))


def _powers(x, top: int):
    out = [1]
    for _ in range(top):
        out.append(x if isinstance(out[-1], int) and out[-1] == 1 else out[-1] * x)
    return out


def _diag_pieces(u, bg: ConfBackground, jmax: int):
    du = bg.grad(u)
    g2 = bg.flat_inner(du, du)
    H = bg.flat_hessian(u * u).block
    sig = ta.char_coeffs(H, jmax + 1) if bg.m else [1] + [0] * (jmax + 1)
    T = ta.newton_tensors(H, max(jmax + 1, 0)) if bg.m else []
    return du, g2, sig, T


def djk_diagonal(j: int, k: int, u, bg: ConfBackground):
    """D_j^k(u, ..., u) = u delta(|du|^{2k-2j-2} T_{j-1}(grad |du|^2)) - delta(|du|^{2k-2j-2} sigma_j du)."""
    if k < 1 or not 0 <= j <= k - 1:
        raise ValueError("require k >= 1 and 0 <= j <= k-1")
    _require_flat(bg, "D_j^k")
    u = bg.lift(u)
    du, g2, sig, T = _diag_pieces(u, bg, j)
    gp = _powers(g2, k - j - 1)[k - j - 1]

    out = -bg.flat_divergence([_times(gp, _times(sig[j], x)) for x in du])
    if j >= 1:
        w = ta.apply(T[j - 1], bg.grad(g2))
        out = out + u * bg.flat_divergence([_times(gp, x) for x in w])
    return out


def djk_rewrite_terms(j: int, k: int, u, bg: ConfBackground):
    """u times the second-order expansion of D_j^k(u) for 1 <= j <= k-1 (no u^{-1})."""
    if not 1 <= j <= k - 1:
        raise ValueError("the expansion needs 1 <= j <= k-1")
    _require_flat(bg, "D_j^k")
    u = bg.lift(u)
    du, g2, sig, T = _diag_pieces(u, bg, j + 1)
    pw = _powers(g2, 2 * k)

    def gpow(e):
        return pw[e // 2] if e >= 0 else 0

    def Tq(i):
        return ta.quad_form(T[i], du) if bg.m else 0

    terms = [
        (Fraction(-(2 * k - j - 1), 2), 2 * k - 2 * j - 2, sig[j + 1]),
        (Fraction(-(2 * k - j + 1)), 2 * k - 2 * j, sig[j]),
        (Fraction(k - j - 1), 2 * k - 2 * j - 4, Tq(j + 1) if k - j - 1 else 0),
        (Fraction(4 * (k - j)), 2 * k - 2 * j - 2, Tq(j)),
        (Fraction(4 * (k + 1 - j)), 2 * k - 2 * j, Tq(j - 1)),
    ]
    out = []
    for c, e, f in terms:
        if c == 0 or is_zero_scalar(f):
            continue
        g = gpow(e)
        out.append(_c(c, f if isinstance(g, int) else g * f))
    return _plus(*out)


def djk_diagonal_identity_check(j: int, k: int, u, bg: ConfBackground):
    """u D_j^k(u) minus the expanded form; identically zero when the expansion holds."""
    u = bg.lift(u)
    return u * djk_diagonal(j, k, u, bg) - djk_rewrite_terms(j, k, u, bg)


# ---------------------------------------------------------------------------
# L_{2k}
# ---------------------------------------------------------------------------


def l2k_coefficients(n, k: int) -> list[Fraction]:
    """Weights w_j with L_{2k} = sum_j w_j D_j^k."""
    n = _frac(n)
    if n == 2 * k:
        raise ValueError("the assembly divides by n - 2k")
    b = b_coeffs(n, k)
    pref = -Fraction(1) / Fraction(-2) ** k
    r = (n - 2 * k) / (2 * k)
    return [pref * r**j * b[k - j] for j in range(k)]


def l2k_apply(k: int, inputs: Sequence, bg: ConfBackground, weights: Sequence | None = None):
    """L_{2k}(u_1, ..., u_{2k-1}) on a flat background; equal inputs use the diagonal form.

    ``weights`` replaces the assembly weights (used by negative controls).
    """
    if len(inputs) != 2 * k - 1:
        raise ValueError(f"L_{2 * k} takes {2 * k - 1} inputs")
    _require_flat(bg, "L_2k")
    w = l2k_coefficients(bg.n, k) if weights is None else [_frac(x) for x in weights]
    diagonal = all(x is inputs[0] for x in inputs)
    terms = []
    for j, c in enumerate(w):
        if c == 0:
            continue
        D = djk_diagonal(j, k, inputs[0], bg) if diagonal else djk_apply(j, k, inputs, bg)
        terms.append(_c(c, D))
    return _plus(*terms)


def sigma_assembly_check(k: int, n: int, ctx, c=1, upsilon=0, weights: Sequence | None = None):
    """u (L_{2k}(u, ..., u) - ((n-2k)/(2k) u)^{2k-1} u^{4k^2/(n-2k)} sigma_k(g_u)) with u = exp(c Upsilon).

    ``ctx`` is a symbolic context and ``upsilon`` selects the potential that
    plays the role of Upsilon.  Returns the residual field.
    """
    from .field_calculus import symbolic_background

    if n == 2 * k:
        raise ValueError("n = 2k is excluded")
    c = _frac(c)
    flat = symbolic_background(n, ctx)
    key = flat.backend.potential_key(upsilon)
    u = ctx.exp(tuple(c * q for q in key))
    lhs = l2k_apply(k, [u] * (2 * k - 1), flat, weights)
    phi_u = tuple(Fraction(2 * k, n - 2 * k) * c * q for q in key)
    bg_u = symbolic_background(n, ctx, phi_u)
    expo = c * (2 * k - 1) + c * Fraction(4 * k * k, n - 2 * k)
    rhs = ctx.exp(tuple(expo * q for q in key)) * bg_u.sigma_P(k)
    rhs = rhs.scale(Fraction(n - 2 * k, 2 * k) ** (2 * k - 1))
    return u * (lhs - rhs)


def sigma_assembly_check_torus(k: int, n: int, u: GridField, shape=None) -> float:
    """Relative max residual of the same identity for a positive grid field ``u``."""
    from .field_calculus import torus_background

    if n == 2 * k:
        raise ValueError("n = 2k is excluded")
    shape = u.shape if shape is None else shape
    flat = torus_background(n, shape)
    lhs = l2k_apply(k, [u] * (2 * k - 1), flat)
    phi_u = u.log() * (2 * k / (n - 2 * k))
    bg_u = torus_background(n, shape, phi_u)
    power = (2 * k - 1) + 4 * k * k / (n - 2 * k)
    rhs = u.apply(lambda v: v**power) * bg_u.sigma_P(k) * ((n - 2 * k) / (2 * k)) ** (2 * k - 1)
    res = (lhs - rhs).max_abs()
    scale = max(lhs.max_abs(), rhs.max_abs(), 1e-300)
    return res / scale


# ---------------------------------------------------------------------------
# top-degree operator
# ---------------------------------------------------------------------------


def top_degree_apply(k: int, inputs: Sequence, bg: ConfBackground):
    """sum over S_k of delta(<du_1, du_2> ... <du_{k-2}, du_{k-1}> du_k) for odd k."""
    if k < 1 or k % 2 == 0:
        raise ValueError("the top-degree operator needs odd k")
    if len(inputs) != k:
        raise ValueError(f"expected {k} inputs")
    pc = _PairCache(bg, inputs)
    half = (k - 1) // 2
    mult = 2**half * math.factorial(half)
    terms = []
    for single in range(k):
        rest = [i for i in range(k) if i != single]
        for matching in _perfect_matchings(rest):
            coef = 1
            for a, b in matching:
                coef = _times(coef, bg.inner(pc.grad(a), pc.grad(b)))
            omega = [_times(coef, x) for x in pc.grad(single)]
            terms.append(_c(mult, bg.divergence(omega)))
    return _plus(*terms)


# ---------------------------------------------------------------------------
# curved bilinear operators D_2 and D_4
# ---------------------------------------------------------------------------


def d2_coefficients(n) -> dict:
    return {"J": Fraction(4) * (_frac(n) - 2) / 3}


def d4_coefficients(n) -> dict:
    n = _frac(n)
    return {
        "lap": 2 * (n - 4) / (n + 2),
        "J": -2 * (4 * n * n - 17 * n + 22) / (3 * (n + 2)),
        "P": 2 * (n + 2) / 3,
        "Q4": 8 * (n - 1) * (n - 4) / (3 * (n + 2)),
        "sigma2": 8 * (n - 4) ** 3 / (9 * (n + 2)),
    }


def covariant_pair_apply(order: int, u, v, bg: ConfBackground, perturb: dict | None = None):
    """Curved D_2 (order 2) or D_4 (order 4); ``perturb`` adds to named coefficients."""
    n = bg.n
    u, v = bg.lift(u), bg.lift(v)
    uv = u * v
    if order == 2:
        if n < 2:
            raise ValueError("D_2 needs n >= 2")
        co = d2_coefficients(n)
        for key, dv in (perturb or {}).items():
            co[key] = co[key] + _frac(dv)
        out = -bg.laplacian(uv) - u * bg.laplacian(v) - v * bg.laplacian(u)
        if n >= 3 and not bg.flat:
            out = out + _c(co["J"], bg.J() * uv)
        return out
    if order != 4:
        raise ValueError("order must be 2 or 4")
    if n < 3:
        raise ValueError("D_4 needs n >= 3")
    co = d4_coefficients(n)
    for key, dv in (perturb or {}).items():
        co[key] = co[key] + _frac(dv)
    lap = bg.laplacian
    Lu, Lv = lap(u), lap(v)
    out = _plus(lap(lap(uv)), u * lap(Lv), v * lap(Lu))
    out = _plus(out, _c(co["lap"], _plus(lap(u * Lv + v * Lu), Lu * Lv)))
    if bg.flat:
        return out
    J = bg.J()
    P = bg.schouten()

    def dJ(f):
        return bg.divergence([J * x for x in bg.grad(f)])

    def dP(f):
        return bg.divergence(bg.raise_apply(P, bg.grad(f)))

    out = _plus(
        out,
        _c(co["J"], _plus(dJ(uv), u * dJ(v), v * dJ(u))),
        _c(co["P"], _plus(dP(uv), u * dP(v), v * dP(u))),
        _c(co["Q4"], INVARIANTS["Q4"].evaluate(bg) * uv),
        _c(co["sigma2"], sigma2(bg) * uv),
    )
    return out


def trilinear_flat_apply(k: int, u, v, bg: ConfBackground, table: dict | None = None):
    """(-1)^k sum a_{r,s,t} Delta^r(Delta^s u Delta^t v) on a flat background."""
    _require_flat(bg, "the flat trilinear-family formula")
    table = trilinear_table(bg.n, k) if table is None else table
    u, v = bg.lift(u), bg.lift(v)
    lu, lv = [u], [v]
    for _ in range(k):
        lu.append(bg.flat_laplacian(lu[-1]))
        lv.append(bg.flat_laplacian(lv[-1]))
    terms = []
    for (r, s, t), a in table.items():
        if a == 0:
            continue
        f = lu[s] * lv[t]
        for _ in range(r):
            f = bg.flat_laplacian(f)
        terms.append(_c(a, f))
    out = _plus(*terms)
    return _c(-1, out) if k % 2 else out


# ---------------------------------------------------------------------------
# descriptors and generic checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorDescriptor:
    """A named polydifferential operator with its conformal data."""

    name: str
    arity: int
    k: int
    evaluator: Callable = field(compare=False, repr=False)
    background: str = "conformally-flat"  # or "flat"
    min_dim: int = 1

    @property
    def weight(self) -> int:
        return -2 * self.k

    def bidegree(self, n) -> tuple[Fraction, Fraction]:
        return bidegree(self.arity, self.k, n)

    def __call__(self, inputs: Sequence, bg: ConfBackground):
        if len(inputs) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} inputs")
        if self.background == "flat":
            _require_flat(bg, self.name)
        if bg.n < self.min_dim:
            raise ValueError(f"{self.name} needs n >= {self.min_dim}")
        return self.evaluator(list(inputs), bg)


def neg_laplacian_op() -> OperatorDescriptor:
    return OperatorDescriptor("-Delta", 1, 1, lambda x, bg: -bg.laplacian(bg.lift(x[0])))


def d2_op(perturb: dict | None = None) -> OperatorDescriptor:
    name = "D2" if not perturb else "D2*"
    return OperatorDescriptor(name, 2, 1, lambda x, bg: covariant_pair_apply(2, x[0], x[1], bg, perturb), min_dim=2)


def d4_op(perturb: dict | None = None) -> OperatorDescriptor:
    name = "D4" if not perturb else "D4*"
    return OperatorDescriptor(name, 2, 2, lambda x, bg: covariant_pair_apply(4, x[0], x[1], bg, perturb), min_dim=3)


def djk_op(j: int, k: int, method: str = "coalesced") -> OperatorDescriptor:
    return OperatorDescriptor(
        f"D_{j}^{k}", 2 * k - 1, k, lambda x, bg: djk_apply(j, k, x, bg, method), background="flat"
    )


def l2k_op(k: int) -> OperatorDescriptor:
    return OperatorDescriptor(f"L_{2 * k}", 2 * k - 1, k, lambda x, bg: l2k_apply(k, x, bg), background="flat")


def top_degree_op(k: int) -> OperatorDescriptor:
    return OperatorDescriptor(
        f"top_{k}", k, (k + 1) // 2, lambda x, bg: top_degree_apply(k, x, bg), background="conformally-flat"
    )


def covariance_check(op: OperatorDescriptor, upsilon, inputs: Sequence, n: int, ctx):
    """op at exp(2 Upsilon) delta minus exp(-b Upsilon) op at delta on exp(a Upsilon) inputs."""
    from .field_calculus import symbolic_background

    if op.background == "flat":
        raise ValueError(f"{op.name} is flat-only; a covariance check is meaningless")
    flat = symbolic_background(n, ctx)
    key = flat.backend.potential_key(upsilon)
    curved = symbolic_background(n, ctx, key)
    a, b = op.bidegree(n)
    ins = [flat.lift(x) for x in inputs]
    lhs = op(ins, curved)
    ea = ctx.exp(tuple(_frac(a) * q for q in key))
    rhs = op([ea * x for x in ins], flat)
    rhs = ctx.exp(tuple(-_frac(b) * q for q in key)) * flat.lift(rhs)
    return lhs - rhs


def _transpositions(size: int):
    return [(i, i + 1) for i in range(size - 1)]


@dataclass
class SelfAdjointReport:
    values: dict
    max_deviation: float
    scale: float

    @property
    def relative(self) -> float:
        return self.max_deviation / self.scale if self.scale else self.max_deviation


def pairing_value(op: OperatorDescriptor, inputs: Sequence, bg: ConfBackground) -> float:
    """Integral of u_0 op(u_1, ..., u_l) against dvol_g."""
    return bg.integrate_g(bg.lift(inputs[0]) * op(inputs[1:], bg))


def selfadjointness_check(op: OperatorDescriptor, inputs: Sequence, bg: ConfBackground, perms=None) -> SelfAdjointReport:
    """Compare the pairing over the identity and a generating set of permutations.

    The default generating set is the adjacent transpositions of the
    ``l + 1`` slots.  Returns absolute and relative deviations.
    """
    if len(inputs) != op.arity + 1:
        raise ValueError(f"{op.name} needs {op.arity + 1} fields for its pairing")
    if bg.exact:
        raise TypeError("self-adjointness is checked by quadrature on the torus backend")
    size = op.arity + 1
    perms = perms or [tuple(range(size))] + [
        tuple(b if i == a else a if i == b else i for i in range(size)) for a, b in _transpositions(size)
    ]
    values = {}
    for p in perms:
        values[p] = pairing_value(op, [inputs[i] for i in p], bg)
    ref = values[perms[0]]
    dev = max(abs(v - ref) for v in values.values())
    scale = max(abs(v) for v in values.values())
    return SelfAdjointReport(values, dev, scale)


# ---------------------------------------------------------------------------
# Dirichlet energy identity
# ---------------------------------------------------------------------------


def djk_energy_sides(j: int, k: int, inputs: Sequence, bg: ConfBackground) -> tuple[float, float]:
    """((2k)! int u_0 D_j^k(u_1..), k/(k-j) sum_{S_2k} int sigma_j(...) N_{k-j}(...)) on a flat torus."""
    if len(inputs) != 2 * k:
        raise ValueError(f"expected {2 * k} fields")
    _require_flat(bg, "the energy identity")
    lhs = math.factorial(2 * k) * bg.integrate(bg.lift(inputs[0]) * djk_apply(j, k, inputs[1:], bg))
    pc = _PairCache(bg, inputs)
    mult = 2**k * math.factorial(j) * math.factorial(k - j)
    total = 0.0
    for matching in _perfect_matchings(list(range(2 * k))):
        for chosen in itertools.combinations(range(k), j):
            s_pairs = [matching[i] for i in chosen]
            n_pairs = [matching[i] for i in range(k) if i not in chosen]
            sig = pc.sigma(s_pairs)
            N = pc.N(n_pairs)
            if is_zero_scalar(sig):
                continue
            f = _times(sig, N)
            total += mult * bg.integrate(bg.lift(f))
    return lhs, k / (k - j) * total
