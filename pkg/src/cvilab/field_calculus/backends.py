"""The two scalar backends behind :class:`~cvilab.field_calculus.background.ConfBackground`.

Both expose the same small surface: number of active axes ``m``, flat
partial derivatives, constants, and ``exp(q * phi)`` for the background
potential.  A backend never knows the tensor dimension ``n``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ..exactnum import Context, ExpField, MultiPoly, rational, mpq
from .grid import GridField


class SymbolicBackend:
    """Exact fields: :class:`ExpField` values over a :class:`Context`.

    A potential is stored as a key: a tuple of rationals ``c`` meaning
    ``sum_a c_a psi_a`` over the context potentials.
    """

    kind = "symbolic"
    exact = True

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self.m = ctx.space.ncoords

    def __eq__(self, other):
        return isinstance(other, SymbolicBackend) and other.ctx is self.ctx

    def __hash__(self):
        return id(self.ctx)

    def zero_potential(self):
        return self.ctx.zero_key()

    def potential_key(self, which) -> tuple:
        if isinstance(which, int) and not isinstance(which, bool):
            w = [mpq(0)] * self.ctx.npot
            w[which] = mpq(1)
            return tuple(w)
        if isinstance(which, str):
            return self.ctx.key({which: 1})
        return self.ctx.key(which)

    def add_potentials(self, a, b, t=1):
        t = rational(t)
        return tuple(x + t * y for x, y in zip(a, b))

    def potential_is_zero(self, phi) -> bool:
        return not any(phi)

    def potential_poly(self, phi) -> MultiPoly:
        out = self.ctx.space.zero()
        for c, p in zip(phi, self.ctx.potentials):
            if c:
                out = out + p.scale(c)
        return out

    def potential_grad(self, phi) -> list:
        p = self.potential_poly(phi)
        return [self.ctx.poly(p.partial(i)) for i in range(self.m)]

    def exp_potential(self, phi, q) -> ExpField:
        q = rational(q)
        if not q or not any(phi):
            return self.ctx.const(1)
        return self.ctx.exp(tuple(q * c for c in phi))

    def const(self, c) -> ExpField:
        return self.ctx.const(rational(c) if not isinstance(c, MultiPoly) else c)

    def lift(self, x) -> ExpField:
        if isinstance(x, ExpField):
            if x.ctx is not self.ctx:
                raise ValueError("field belongs to another context")
            return x
        if isinstance(x, MultiPoly):
            return self.ctx.poly(x)
        return self.ctx.const(x)

    def partial(self, f, axis: int):
        if not isinstance(f, ExpField):
            return 0
        return f.partial(axis)

    def is_zero(self, f) -> bool:
        if isinstance(f, ExpField):
            return f.is_zero()
        return f == 0

    def scale(self, c, f):
        if isinstance(f, ExpField):
            return f.scale(c)
        return rational(c) * f


class TorusBackend:
    """Spectral grid fields on the unit torus with ``len(shape)`` active axes."""

    kind = "torus"
    exact = False

    def __init__(self, shape: Sequence[int]):
        self.shape = tuple(int(N) for N in shape)
        if not self.shape or any(N < 1 for N in self.shape):
            raise ValueError("torus shape must be a nonempty tuple of positive sizes")
        self.m = len(self.shape)

    def __eq__(self, other):
        return isinstance(other, TorusBackend) and other.shape == self.shape

    def __hash__(self):
        return hash(self.shape)

    def zero_potential(self):
        return GridField.constant(self.shape, 0.0)

    def potential_key(self, which) -> GridField:
        return self.lift(which)

    def add_potentials(self, a, b, t=1):
        if isinstance(t, str):
            raise TypeError("formal parameters are only available on the symbolic backend")
        return a + b * float(t)

    def potential_is_zero(self, phi) -> bool:
        return phi.is_zero()

    def potential_grad(self, phi) -> list:
        return [phi.partial(i) for i in range(self.m)]

    def exp_potential(self, phi, q) -> GridField:
        q = float(q)
        if q == 0.0 or phi.is_zero():
            return GridField.constant(self.shape, 1.0)
        return GridField(np.exp(q * phi.values), (None,) * self.m)

    def const(self, c) -> GridField:
        return GridField.constant(self.shape, c)

    def lift(self, x) -> GridField:
        if isinstance(x, GridField):
            if x.shape != self.shape:
                raise ValueError(f"grid shape {x.shape} does not match backend {self.shape}")
            return x
        if isinstance(x, (ExpField, MultiPoly)):
            raise TypeError("symbolic field passed to the torus backend")
        return GridField.constant(self.shape, x)

    def partial(self, f, axis: int):
        if not isinstance(f, GridField):
            return 0
        return f.partial(axis)

    def is_zero(self, f) -> bool:
        if isinstance(f, GridField):
            return f.is_zero()
        return f == 0

    def scale(self, c, f):
        return f * float(c) if isinstance(f, GridField) else float(c) * f


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(str(rational(x)))
