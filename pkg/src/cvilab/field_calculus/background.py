"""Conformally flat backgrounds g = exp(2 phi) delta and their calculus.

The tensor dimension ``n`` is a free parameter.  Only the first ``m``
coordinates are active: every field is constant along the remaining
``n - m`` directions, so derivative-built one-forms live on the active block
and symmetric two-tensors are an ``m x m`` block plus a multiple of the
identity on the inactive directions (the *tail*).

Index conventions: one-forms are lists of ``m`` lower-index components,
two-tensors are lower-index :class:`Sym2Field` objects.  Raising an index
with ``g`` costs a factor ``exp(-2 phi)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .. import tensor_algebra as ta
from ..exactnum import ExpField, MultiPoly, rational
from .backends import SymbolicBackend, TorusBackend
from .grid import GridField


def _sum(items):
    items = [x for x in items if not (isinstance(x, int) and x == 0)]
    if not items:
        return 0
    return reduce(lambda a, b: a + b, items)


def _cscale(c, x):
    """Multiply by a rational constant, keeping 0 as the integer 0."""
    if isinstance(x, int) and x == 0:
        return 0
    if c == 1:
        return x
    if isinstance(x, GridField):
        return x * float(c)
    return x * Fraction(c)


def is_zero_scalar(x) -> bool:
    if isinstance(x, (ExpField, MultiPoly)):
        return x.is_zero()
    if isinstance(x, GridField):
        return False
    return x == 0


class Sym2Field:
    """Symmetric two-tensor: active ``m x m`` block plus ``tail * identity`` on inactive axes."""

    __slots__ = ("block", "tail", "n")

    def __init__(self, block, tail, n: int):
        m = len(block)
        if any(len(row) != m for row in block):
            raise ValueError("block must be square")
        if m > n:
            raise ValueError("block larger than the tensor dimension")
        self.block = [list(row) for row in block]
        self.tail = tail if n > m else 0
        self.n = n

    @property
    def m(self) -> int:
        return len(self.block)

    @property
    def inactive(self) -> int:
        return self.n - self.m

    def _binop(self, other, op):
        if not isinstance(other, Sym2Field) or other.n != self.n or other.m != self.m:
            raise ValueError("incompatible two-tensors")
        return Sym2Field(
            [[op(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.block, other.block)],
            op(self.tail, other.tail),
            self.n,
        )

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __neg__(self):
        return Sym2Field([[-a for a in row] for row in self.block], -self.tail, self.n)

    def scale(self, c) -> "Sym2Field":
        return Sym2Field(
            [[_cscale(c, a) for a in row] for row in self.block], _cscale(c, self.tail), self.n
        )

    def times(self, f) -> "Sym2Field":
        """Multiply every component by the scalar field ``f``."""
        return Sym2Field([[a * f for a in row] for row in self.block], self.tail * f, self.n)

    @classmethod
    def identity(cls, m: int, n: int, one=1) -> "Sym2Field":
        return cls(ta.identity(m, one, 0), one, n)

    @classmethod
    def outer(cls, a: Sequence, b: Sequence | None, n: int) -> "Sym2Field":
        """Symmetrized a (x) b (equal to a (x) a when ``b`` is None)."""
        m = len(a)
        if b is None:
            block = [[a[i] * a[j] for j in range(m)] for i in range(m)]
        else:
            half = Fraction(1, 2)
            block = [
                [_cscale(half, a[i] * b[j] + a[j] * b[i]) for j in range(m)] for i in range(m)
            ]
        return cls(block, 0, n)

    # -- flat (delta) algebra --------------------------------------------
    def trace(self):
        t = ta.trace(self.block) if self.m else 0
        if self.inactive and not is_zero_scalar(self.tail):
            t = t + _cscale(self.inactive, self.tail)
        return t

    def norm_sq(self):
        s = _sum(self.block[i][j] * self.block[i][j] for i in range(self.m) for j in range(self.m))
        if self.inactive and not is_zero_scalar(self.tail):
            s = s + _cscale(self.inactive, self.tail * self.tail)
        return s

    def apply(self, v: Sequence) -> list:
        """Contract the second index with the active vector ``v``."""
        return [_sum(self.block[i][j] * v[j] for j in range(self.m)) for i in range(self.m)]

    def quad(self, v: Sequence, w: Sequence | None = None):
        w = v if w is None else w
        return _sum(v[i] * self.block[i][j] * w[j] for i in range(self.m) for j in range(self.m))

    def matmul(self, other: "Sym2Field") -> "Sym2Field":
        """Product as endomorphisms with respect to delta (block-diagonal)."""
        return Sym2Field(ta.mat_mul(self.block, other.block), self.tail * other.tail, self.n)

    def full(self) -> list:
        """All ``n x n`` components."""
        n, m = self.n, self.m
        out = [[0] * n for _ in range(n)]
        for i in range(m):
            for j in range(m):
                out[i][j] = self.block[i][j]
        for i in range(m, n):
            out[i][i] = self.tail
        return out


def blocktail_sigmas(S: Sym2Field, kmax: int, one=1) -> list:
    """[sigma_0, ..., sigma_kmax] of ``block (+) tail * I_{n-m}`` (w.r.t. delta)."""
    sig_block = ta.char_coeffs(S.block, kmax, one) if S.m else [one] + [0] * kmax
    r = S.inactive
    if r == 0 or is_zero_scalar(S.tail):
        return sig_block
    c = S.tail
    cpow = [one]
    for _ in range(kmax):
        cpow.append(cpow[-1] * c)
    out = []
    for k in range(kmax + 1):
        acc = 0
        for j in range(0, min(k, r) + 1):
            sb = sig_block[k - j]
            if is_zero_scalar(sb):
                continue
            acc = acc + _cscale(math.comb(r, j), cpow[j] * sb) if j else acc + sb
        out.append(acc)
    return out


def blocktail_sigma(S: Sym2Field, k: int, one=1):
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > S.n:
        return 0
    return blocktail_sigmas(S, k, one)[k]


def blocktail_newtons(S: Sym2Field, kmax: int, one=1) -> list:
    """[T_0, ..., T_kmax] of the endomorphism ``block (+) tail`` by T_k = sigma_k I - T_{k-1} S."""
    sig = blocktail_sigmas(S, kmax, one)
    T = [Sym2Field.identity(S.m, S.n, one)]
    for k in range(1, kmax + 1):
        prev = T[-1]
        TA = ta.mat_mul(prev.block, S.block) if S.m else []
        block = [
            [(sig[k] if i == j else 0) - TA[i][j] for j in range(S.m)] for i in range(S.m)
        ]
        tail = sig[k] - prev.tail * S.tail if S.inactive else 0
        T.append(Sym2Field(block, tail, S.n))
    return T


class ConfBackground:
    """The metric ``exp(2 phi) delta`` in tensor dimension ``n`` over a backend.

    ``phi`` is a potential key on the symbolic backend and a
    :class:`GridField` on the torus backend; ``None`` means flat.
    """

    def __init__(self, n: int, backend, phi=None):
        if not isinstance(n, int) or n < 1:
            raise ValueError("dimension must be a positive integer")
        if backend.m > n:
            raise ValueError(f"{backend.m} active axes exceed dimension {n}")
        self.n = n
        self.backend = backend
        self.m = backend.m
        self.phi = backend.zero_potential() if phi is None else backend.potential_key(phi)
        self.flat = backend.potential_is_zero(self.phi)
        self.dphi = None if self.flat else backend.potential_grad(self.phi)
        self._weights: dict = {}
        self._cache: dict = {}

    # -- basics -----------------------------------------------------------
    @property
    def kind(self) -> str:
        return self.backend.kind

    @property
    def exact(self) -> bool:
        return self.backend.exact

    def __repr__(self):
        return f"ConfBackground(n={self.n}, m={self.m}, kind={self.kind}, flat={self.flat})"

    def with_dimension(self, n: int) -> "ConfBackground":
        return ConfBackground(n, self.backend, self.phi)

    def lift(self, x):
        return self.backend.lift(x)

    def const(self, c):
        return self.backend.const(c)

    def weight(self, q):
        """exp(q * phi)."""
        q = rational(q)
        if q not in self._weights:
            self._weights[q] = self.backend.exp_potential(self.phi, q)
        return self._weights[q]

    def _w(self, q, f):
        """exp(q phi) * f, skipping the product when flat."""
        if self.flat or is_zero_scalar(f):
            return f
        return self.weight(q) * f

    def partial(self, f, axis: int):
        return self.backend.partial(f, axis)

    def grad(self, f) -> list:
        """Flat differential (lower-index active components)."""
        return [self.partial(f, i) for i in range(self.m)]

    # -- flat pieces ------------------------------------------------------
    def flat_inner(self, a: Sequence, b: Sequence):
        return _sum(x * y for x, y in zip(a, b))

    def flat_laplacian(self, f):
        return _sum(self.partial(self.partial(f, i), i) for i in range(self.m))

    def flat_divergence(self, omega: Sequence):
        return _sum(self.partial(omega[i], i) for i in range(self.m))

    def flat_hessian(self, f) -> Sym2Field:
        g = self.grad(f)
        block = [[None] * self.m for _ in range(self.m)]
        for i in range(self.m):
            for j in range(i, self.m):
                block[i][j] = block[j][i] = self.partial(g[i], j)
        return Sym2Field(block, 0, self.n)

    # -- curved operators --------------------------------------------------
    def inner(self, a: Sequence, b: Sequence):
        """<a, b>_g for one-forms."""
        return self._w(-2, self.flat_inner(a, b))

    def grad_norm_sq(self, f):
        g = self.grad(f)
        return self.inner(g, g)

    def laplacian(self, f):
        """exp(-2 phi) (Delta f + (n-2) <d phi, d f>)."""
        lap = self.flat_laplacian(f)
        if self.flat:
            return lap
        cross = self.flat_inner(self.dphi, self.grad(f))
        return self.weight(-2) * (lap + _cscale(self.n - 2, cross))

    def divergence(self, omega: Sequence):
        """Formal divergence of a one-form, normalized so that divergence(df) = laplacian(f)."""
        if len(omega) != self.m:
            raise ValueError("one-form must have one component per active axis")
        div = self.flat_divergence(omega)
        if self.flat:
            return div
        return self.weight(-2) * (div + _cscale(self.n - 2, self.flat_inner(self.dphi, omega)))

    def hessian(self, f) -> Sym2Field:
        """Levi-Civita Hessian of a function (lower indices)."""
        H = self.flat_hessian(f)
        if self.flat:
            return H
        df = self.grad(f)
        cross = self.flat_inner(self.dphi, df)
        m = self.m
        block = [
            [
                H.block[i][j]
                - self.dphi[j] * df[i]
                - self.dphi[i] * df[j]
                + (cross if i == j else 0)
                for j in range(m)
            ]
            for i in range(m)
        ]
        return Sym2Field(block, cross, self.n)

    def raise_apply(self, S: Sym2Field, omega: Sequence) -> list:
        """The one-form S(omega^sharp): contract S with omega using g^{-1}."""
        return [self._w(-2, x) for x in S.apply(omega)]

    def sym_norm_sq(self, S: Sym2Field):
        return self._w(-4, S.norm_sq())

    def sym_trace(self, S: Sym2Field):
        return self._w(-2, S.trace())

    def endo_sigma(self, S: Sym2Field, k: int):
        """sigma_k of the endomorphism g^{-1} S."""
        return self._w(-2 * k, blocktail_sigma(S, k))

    def endo_sigmas(self, S: Sym2Field, kmax: int) -> list:
        sig = blocktail_sigmas(S, kmax)
        return [self._w(-2 * k, s) for k, s in enumerate(sig)]

    # -- curvature ---------------------------------------------------------
    def schouten(self) -> Sym2Field:
        """Schouten tensor -Hess(phi) + d phi (x) d phi - |d phi|^2 delta / 2 (flat derivatives)."""
        if self.n < 3:
            raise ValueError("the Schouten tensor needs dimension at least 3")
        if "P" not in self._cache:
            m = self.m
            if self.flat:
                z = self.const(0)
                self._cache["P"] = Sym2Field([[z] * m for _ in range(m)], z, self.n)
            else:
                dp = self.dphi
                H = [[self.partial(dp[i], j) for j in range(m)] for i in range(m)]
                half_sq = _cscale(Fraction(-1, 2), self.flat_inner(dp, dp))
                block = [
                    [-H[i][j] + dp[i] * dp[j] + (half_sq if i == j else 0) for j in range(m)]
                    for i in range(m)
                ]
                self._cache["P"] = Sym2Field(block, half_sq, self.n)
        return self._cache["P"]

    def J(self):
        if "J" not in self._cache:
            self._cache["J"] = self.sym_trace(self.schouten())
        return self._cache["J"]

    def P_norm_sq(self):
        if "|P|2" not in self._cache:
            self._cache["|P|2"] = self.sym_norm_sq(self.schouten())
        return self._cache["|P|2"]

    def sigma_P(self, k: int):
        key = ("sigma", k)
        if key not in self._cache:
            self._cache[key] = self.endo_sigma(self.schouten(), k)
        return self._cache[key]

    def trace_P_cubed(self):
        P = self.schouten()
        P3 = P.matmul(P).matmul(P)
        return self._w(-6, P3.trace())

    def cotton(self) -> list:
        """Components C_ijk = nabla_k P_ij - nabla_j P_ik for representative indices.

        Inactive directions are interchangeable, so at most three of them are kept.
        """
        P = self.schouten()
        nn = min(self.n, self.m + 3)
        Pf = Sym2Field(P.block, P.tail, nn).full() if nn > self.m else P.block
        m = self.m
        dphi = list(self.dphi or [0] * m) + [0] * (nn - m)

        def d(f, k):
            return self.partial(f, k) if k < m and not is_zero_scalar(f) else 0

        def nabla(k, i, j):
            val = d(Pf[i][j], k)
            corr = [
                dphi[i] * Pf[k][j],
                dphi[k] * Pf[i][j],
                dphi[j] * Pf[i][k],
                dphi[k] * Pf[i][j],
            ]
            val = val - _sum(x for x in corr if not is_zero_scalar(x))
            if k == i:
                val = val + _sum(dphi[l] * Pf[l][j] for l in range(m))
            if k == j:
                val = val + _sum(dphi[l] * Pf[i][l] for l in range(m))
            return val

        out = []
        for i in range(nn):
            for j in range(nn):
                for k in range(nn):
                    if j < k:
                        out.append(((i, j, k), nabla(k, i, j) - nabla(j, i, k)))
        return out

    # -- volume and integration ---------------------------------------------
    def dvol(self):
        """Density of the Riemannian volume, exp(n phi)."""
        return self.weight(self.n) if not self.flat else self.const(1)

    def integrate(self, f) -> float:
        """Trapezoidal integral over the unit torus (flat measure)."""
        if not isinstance(self.backend, TorusBackend):
            raise TypeError("integration is only available on the torus backend")
        return self.lift(f).integrate()

    def integrate_g(self, f) -> float:
        """Integral against dvol_g."""
        return self.integrate(self._w(self.n, self.lift(f)))

    # -- conformal change ---------------------------------------------------
    def rescale(self, upsilon, t=1) -> "ConfBackground":
        """The background exp(2 t Upsilon) g.

        ``t`` is a rational, or on the symbolic backend the name of a formal
        parameter; in that case the context must hold a potential equal to
        ``t * Upsilon``.
        """
        b = self.backend
        if isinstance(t, str):
            if not isinstance(b, SymbolicBackend):
                raise TypeError("formal parameters are only available on the symbolic backend")
            target = b.ctx.space.param(t) * b.potential_poly(b.potential_key(upsilon))
            for a, p in enumerate(b.ctx.potentials):
                if p == target:
                    return ConfBackground(self.n, b, b.add_potentials(self.phi, b.potential_key(a)))
            raise ValueError(f"context has no potential equal to {t} * Upsilon")
        if isinstance(upsilon, (ExpField, MultiPoly)) and isinstance(b, TorusBackend):
            raise TypeError("cannot mix symbolic and grid data")
        if isinstance(upsilon, GridField) and isinstance(b, SymbolicBackend):
            raise TypeError("cannot mix symbolic and grid data")
        return ConfBackground(self.n, b, b.add_potentials(self.phi, b.potential_key(upsilon), t))


def symbolic_background(n: int, ctx, phi=None) -> ConfBackground:
    return ConfBackground(n, SymbolicBackend(ctx), phi)


def torus_background(n: int, shape: Sequence[int], phi: GridField | None = None) -> ConfBackground:
    return ConfBackground(n, TorusBackend(shape), phi)
