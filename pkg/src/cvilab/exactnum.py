"""Exact scalar ring for the symbolic backend.

Three layers:

* ``rational`` -- arbitrary-precision rationals (``gmpy2.mpq``), always in
  lowest terms.
* :class:`MultiPoly` -- sparse multivariate polynomials over the rationals.
  Monomials are packed into a single Python integer (``_BITS`` bits per
  variable) so that multiplying monomials is integer addition.
* :class:`ExpField` -- finite sums ``sum_q exp(q . psi) p_q(x)`` where ``psi``
  is a tuple of polynomial potentials held by a :class:`Context`.  The type is
  closed under coordinate differentiation, which is all the curvature
  formulas need.

Formal parameters (``t``) are ordinary polynomial variables: they are never
differentiated by :meth:`MultiPoly.partial`, only by
:meth:`MultiPoly.param_partial`.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

mpq = gmpy2.mpq
_MPQ = type(mpq(0))

_BITS = 12
_MASK = (1 << _BITS) - 1
MAX_DEGREE = _MASK


def rational(x) -> "mpq":
    """Coerce ``x`` to an exact rational; floats are refused."""
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, (int, Fraction)) or type(x).__name__ == "mpz":
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    if isinstance(x, numbers.Integral):
        return mpq(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, _MPQ)) or type(x).__name__ == "mpz"


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolySpace:
    """Variable layout: ``ncoords`` differentiable coordinates, then parameters."""

    ncoords: int
    params: tuple[str, ...] = ()
    coord_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.ncoords < 0:
            raise ValueError("ncoords must be nonnegative")
        if not self.coord_names:
            object.__setattr__(
                self, "coord_names", tuple(f"x{i}" for i in range(self.ncoords))
            )
        if len(self.coord_names) != self.ncoords:
            raise ValueError("one name per coordinate required")

    @property
    def nvars(self) -> int:
        return self.ncoords + len(self.params)

    @property
    def names(self) -> tuple[str, ...]:
        return self.coord_names + self.params

    def param_index(self, name: str) -> int:
        try:
            return self.ncoords + self.params.index(name)
        except ValueError:
            raise KeyError(f"no parameter named {name!r}") from None

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nvars:
            raise ValueError("exponent length mismatch")
        key = 0
        for i, e in enumerate(exps):
            if e < 0 or e > MAX_DEGREE:
                raise ValueError("exponent out of range")
            key |= e << (_BITS * i)
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> (_BITS * i)) & _MASK for i in range(self.nvars))

    def zero(self) -> "MultiPoly":
        return MultiPoly(self, {})

    def const(self, c) -> "MultiPoly":
        c = rational(c)
        return MultiPoly(self, {0: c} if c else {})

    def var(self, i: int) -> "MultiPoly":
        if not 0 <= i < self.nvars:
            raise IndexError("variable index out of range")
        return MultiPoly(self, {1 << (_BITS * i): mpq(1)})

    def coord(self, i: int) -> "MultiPoly":
        if not 0 <= i < self.ncoords:
            raise IndexError("coordinate index out of range")
        return self.var(i)

    def param(self, name: str) -> "MultiPoly":
        return self.var(self.param_index(name))

    def from_terms(self, terms: Mapping[Sequence[int], object]) -> "MultiPoly":
        out = {}
        for exps, c in terms.items():
            c = rational(c)
            if c:
                k = self.pack(tuple(exps))
                out[k] = out.get(k, 0) + c
        return MultiPoly(self, {k: v for k, v in out.items() if v})


class MultiPoly:
    """Sparse polynomial with rational coefficients; never stores zeros."""

    __slots__ = ("space", "terms")

    def __init__(self, space: PolySpace, terms: dict):
        self.space = space
        self.terms = terms

    # -- coercion ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.space != self.space:
                raise ValueError("polynomials live in different spaces")
            return other
        if _is_scalar(other):
            return self.space.const(other)
        return NotImplemented

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for k, v in b.items():
            s = out.get(k)
            if s is None:
                out[k] = v
            else:
                s = s + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return MultiPoly(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.space, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "MultiPoly":
        c = rational(c)
        if not c:
            return MultiPoly(self.space, {})
        return MultiPoly(self.space, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for kb, vb in b.items():
            for ka, va in a.items():
                k = ka + kb
                s = get(k)
                out[k] = va * vb if s is None else s + va * vb
        return MultiPoly(self.space, {k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        result = self.space.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, MultiPoly) else other
        if other is NotImplemented:
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- calculus ---------------------------------------------------------
    def _dvar(self, i: int) -> "MultiPoly":
        shift = _BITS * i
        one = 1 << shift
        out = {}
        for k, v in self.terms.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - one] = v * e
        return MultiPoly(self.space, out)

    def partial(self, axis: int) -> "MultiPoly":
        if not 0 <= axis < self.space.ncoords:
            raise IndexError(f"axis {axis} out of range for {self.space.ncoords} coordinates")
        return self._dvar(axis)

    def param_partial(self, name: str) -> "MultiPoly":
        return self._dvar(self.space.param_index(name))

    # -- structure --------------------------------------------------------
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(self.space.unpack(k)) for k in self.terms)

    def degree_in(self, var: int | str) -> int:
        i = self.space.param_index(var) if isinstance(var, str) else var
        if not self.terms:
            return -1
        shift = _BITS * i
        return max((k >> shift) & _MASK for k in self.terms)

    def coeff_in(self, var: int | str, j: int) -> "MultiPoly":
        """Coefficient of ``var**j`` (a polynomial not involving ``var``)."""
        i = self.space.param_index(var) if isinstance(var, str) else var
        shift = _BITS * i
        drop = j << shift
        return MultiPoly(
            self.space,
            {k - drop: v for k, v in self.terms.items() if (k >> shift) & _MASK == j},
        )

    def subs(self, var: int | str, value) -> "MultiPoly":
        """Substitute a rational value for one variable."""
        i = self.space.param_index(var) if isinstance(var, str) else var
        value = rational(value)
        shift = _BITS * i
        out: dict = {}
        for k, v in self.terms.items():
            e = (k >> shift) & _MASK
            nk = k - (e << shift)
            c = v * value**e if e else v
            if c:
                out[nk] = out.get(nk, 0) + c
        return MultiPoly(self.space, {k: v for k, v in out.items() if v})

    def evaluate(self, point: Sequence) -> "mpq":
        """Exact value at a rational point (one entry per variable)."""
        if len(point) != self.space.nvars:
            raise ValueError("point has wrong length")
        pt = [rational(p) for p in point]
        total = mpq(0)
        for k, v in self.terms.items():
            term = v
            for i, e in enumerate(self.space.unpack(k)):
                if e:
                    term *= pt[i] ** e
            total += term
        return total

    def evalf(self, point: Sequence[float]) -> float:
        if len(point) != self.space.nvars:
            raise ValueError("point has wrong length")
        total = 0.0
        for k, v in self.terms.items():
            term = float(v)
            for i, e in enumerate(self.space.unpack(k)):
                if e:
                    term *= point[i] ** e
            total += term
        return total

    def sorted_terms(self) -> list[tuple[tuple[int, ...], "mpq"]]:
        """Terms in graded-lexicographic order, highest first."""
        items = [(self.space.unpack(k), v) for k, v in self.terms.items()]
        items.sort(key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
        return items

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                n if e == 1 else f"{n}^{e}" for n, e in zip(self.space.names, exps) if e
            )
            cs = str(c)
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# exponential-weighted fields
# ---------------------------------------------------------------------------


class Context:
    """Shared potentials ``psi_a`` for a family of :class:`ExpField` values.

    Potentials may depend on formal parameters only by vanishing at
    parameter value zero (e.g. ``t * Upsilon``); :meth:`ExpField.at_param_zero`
    relies on this.
    """

    def __init__(self, space: PolySpace, potentials: Sequence[MultiPoly], names=None):
        self.space = space
        self.potentials = tuple(potentials)
        for p in self.potentials:
            if p.space != space:
                raise ValueError("potential lives in a different space")
        self.names = tuple(names) if names else tuple(f"psi{a}" for a in range(len(self.potentials)))
        self._grads = tuple(
            tuple(p.partial(i) for i in range(space.ncoords)) for p in self.potentials
        )
        self._reduced: dict = {}

    @property
    def npot(self) -> int:
        return len(self.potentials)

    def grad(self, a: int, axis: int) -> MultiPoly:
        return self._grads[a][axis]

    # -- constructors -----------------------------------------------------
    def zero_key(self) -> tuple:
        return (mpq(0),) * self.npot

    def key(self, weights) -> tuple:
        if isinstance(weights, Mapping):
            w = [mpq(0)] * self.npot
            for a, q in weights.items():
                a = self.names.index(a) if isinstance(a, str) else a
                w[a] = rational(q)
            return tuple(w)
        w = tuple(rational(q) for q in weights)
        if len(w) != self.npot:
            raise ValueError("one exponent per potential required")
        return w

    def poly(self, p) -> "ExpField":
        if not isinstance(p, MultiPoly):
            p = self.space.const(p)
        return ExpField(self, {self.zero_key(): p} if p.terms else {})

    def const(self, c) -> "ExpField":
        return self.poly(self.space.const(c))

    def zero(self) -> "ExpField":
        return ExpField(self, {})

    def exp(self, weights, coeff=None) -> "ExpField":
        """``exp(sum_a weights[a] * psi_a) * coeff``."""
        p = self.space.const(1) if coeff is None else coeff
        if not isinstance(p, MultiPoly):
            p = self.space.const(p)
        return ExpField(self, {self.key(weights): p} if p.terms else {})

    def coord(self, i: int) -> "ExpField":
        return self.poly(self.space.coord(i))

    def param(self, name: str) -> "ExpField":
        return self.poly(self.space.param(name))

    # -- parameter handling ------------------------------------------------
    def _param_dependent(self, name: str) -> tuple[bool, ...]:
        i = self.space.param_index(name)
        return tuple(p.degree_in(i) > 0 for p in self.potentials)

    def reduced(self, name: str) -> tuple["Context", tuple[int, ...]]:
        """Context with the ``name``-dependent potentials removed."""
        if name not in self._reduced:
            dep = self._param_dependent(name)
            i = self.space.param_index(name)
            for p, d in zip(self.potentials, dep):
                if d and not p.subs(i, 0).is_zero():
                    raise ValueError("parameter-dependent potential must vanish at zero")
            keep = tuple(a for a, d in enumerate(dep) if not d)
            ctx = Context(
                self.space, [self.potentials[a] for a in keep], [self.names[a] for a in keep]
            )
            self._reduced[name] = (ctx, keep)
        return self._reduced[name]


class SurvivingBucketError(ArithmeticError):
    """An exponential bucket that was required to cancel did not."""


class ExpField:
    """``sum_q exp(q . psi) p_q`` with exact rational data.

    ``terms`` maps exponent tuples (one rational per context potential) to
    nonzero polynomials.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: Context, terms: dict):
        self.ctx = ctx
        self.terms = terms

    def _coerce(self, other):
        if isinstance(other, ExpField):
            if other.ctx is not self.ctx:
                raise ValueError("fields belong to different contexts")
            return other
        if isinstance(other, MultiPoly):
            return self.ctx.poly(other)
        if _is_scalar(other):
            return self.ctx.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for q, p in other.terms.items():
            s = out.get(q)
            if s is None:
                out[q] = p
            else:
                s = s + p
                if s.terms:
                    out[q] = s
                else:
                    del out[q]
        return ExpField(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return ExpField(self.ctx, {q: -p for q, p in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "ExpField":
        c = rational(c)
        if not c:
            return ExpField(self.ctx, {})
        return ExpField(self.ctx, {q: p.scale(c) for q, p in self.terms.items()})

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict = {}
        for qa, pa in self.terms.items():
            for qb, pb in other.terms.items():
                q = tuple(x + y for x, y in zip(qa, qb))
                prod = pa * pb
                s = out.get(q)
                out[q] = prod if s is None else s + prod
        return ExpField(self.ctx, {q: p for q, p in out.items() if p.terms})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        result = self.ctx.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, ExpField) else other
        if other is NotImplemented:
            return NotImplemented
        return self.ctx is other.ctx and self.terms == other.terms

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def partial(self, axis: int) -> "ExpField":
        """d/dx_axis (e^{q.psi} p) = e^{q.psi} (p * sum_a q_a d psi_a + d p)."""
        ctx = self.ctx
        if not 0 <= axis < ctx.space.ncoords:
            raise IndexError(f"axis {axis} out of range for {ctx.space.ncoords} coordinates")
        out = {}
        for q, p in self.terms.items():
            d = p.partial(axis)
            for a, qa in enumerate(q):
                if qa:
                    g = ctx.grad(a, axis)
                    if g.terms:
                        d = d + p * g.scale(qa)
            if d.terms:
                out[q] = d
        return ExpField(ctx, out)

    def param_partial(self, name: str) -> "ExpField":
        ctx = self.ctx
        i = ctx.space.param_index(name)
        dpsi = [p._dvar(i) for p in ctx.potentials]
        out = {}
        for q, p in self.terms.items():
            d = p._dvar(i)
            for a, qa in enumerate(q):
                if qa and dpsi[a].terms:
                    d = d + p * dpsi[a].scale(qa)
            if d.terms:
                out[q] = d
        return ExpField(ctx, out)

    def at_param_zero(self, name: str) -> "ExpField":
        """Set a formal parameter to zero (potentials depending on it vanish)."""
        red, keep = self.ctx.reduced(name)
        i = self.ctx.space.param_index(name)
        out: dict = {}
        for q, p in self.terms.items():
            nq = tuple(q[a] for a in keep)
            p0 = p.subs(i, 0)
            if p0.terms:
                s = out.get(nq)
                out[nq] = p0 if s is None else s + p0
        return ExpField(red, {q: p for q, p in out.items() if p.terms})

    def surviving(self, name: str) -> list[tuple]:
        """Keys whose exponent on a ``name``-dependent potential is nonzero."""
        dep = self.ctx._param_dependent(name)
        return [q for q in self.terms if any(qa for qa, d in zip(q, dep) if d)]

    def coeff_in_param(self, name: str, j: int) -> "ExpField":
        """Coefficient of ``name**j``; every parameter-dependent bucket must have cancelled."""
        bad = self.surviving(name)
        if bad:
            raise SurvivingBucketError(
                f"exponential buckets {bad[:3]} depend on parameter {name!r}"
            )
        red, keep = self.ctx.reduced(name)
        i = self.ctx.space.param_index(name)
        out = {}
        for q, p in self.terms.items():
            c = p.coeff_in(i, j)
            if c.terms:
                out[tuple(q[a] for a in keep)] = c
        return ExpField(red, out)

    def param_degree(self, name: str) -> int:
        i = self.ctx.space.param_index(name)
        return max((p.degree_in(i) for p in self.terms.values()), default=-1)

    def relift(self, ctx: Context, keymap=None) -> "ExpField":
        """Move into another context with the same space; ``keymap`` maps old to new keys."""
        if ctx.space != self.ctx.space:
            raise ValueError("contexts must share a polynomial space")
        out: dict = {}
        for q, p in self.terms.items():
            nq = ctx.key(keymap(q) if keymap else q)
            s = out.get(nq)
            out[nq] = p if s is None else s + p
        return ExpField(ctx, {q: p for q, p in out.items() if p.terms})

    def buckets(self) -> dict:
        return dict(self.terms)

    def evaluate(self, point: Sequence) -> dict:
        """Exact bucketwise value ``{q: p_q(point)}``; exponentials stay symbolic."""
        out = {}
        for q, p in self.terms.items():
            v = p.evaluate(point)
            if v:
                out[q] = v
        return out

    def evalf(self, point: Sequence[float]) -> float:
        psi = [p.evalf(point) for p in self.ctx.potentials]
        total = 0.0
        for q, p in self.terms.items():
            total += math.exp(sum(float(qa) * s for qa, s in zip(q, psi))) * p.evalf(point)
        return total

    def max_degree(self) -> int:
        return max((p.degree() for p in self.terms.values()), default=-1)

    def __repr__(self):
        if not self.terms:
            return "ExpField(0)"
        parts = []
        for q, p in sorted(self.terms.items()):
            expo = " + ".join(f"{qa}*{n}" for qa, n in zip(q, self.ctx.names) if qa)
            parts.append(f"exp({expo or 0})*({p!r})")
        return " + ".join(parts)


def product_of_evaluations(a: dict, b: dict) -> dict:
    """Multiply two bucketwise evaluations (convolution over exponent keys)."""
    out: dict = {}
    for qa, va in a.items():
        for qb, vb in b.items():
            q = tuple(x + y for x, y in zip(qa, qb))
            out[q] = out.get(q, 0) + va * vb
    return {q: v for q, v in out.items() if v}


def symbolic_context(
    ncoords: int,
    potentials: Iterable = (),
    params: Sequence[str] = (),
    names=None,
) -> Context:
    """Build a context from potentials given as term dicts or callables on the space.

    Each potential is either a :class:`MultiPoly` already in a compatible
    space, a mapping ``{exponent tuple: coefficient}``, or a callable taking
    the :class:`PolySpace` and returning a polynomial.
    """
    space = PolySpace(ncoords, tuple(params))
    pots = []
    for p in potentials:
        if isinstance(p, MultiPoly):
            if p.space != space:
                p = MultiPoly(space, dict(p.terms)) if p.space.nvars == space.nvars else _embed(p, space)
            pots.append(p)
        elif isinstance(p, Mapping):
            pots.append(space.from_terms(p))
        elif callable(p):
            pots.append(p(space))
        else:
            raise TypeError("unsupported potential specification")
    return Context(space, pots, names)


def _embed(p: MultiPoly, space: PolySpace) -> MultiPoly:
    """Re-express ``p`` in a space with the same coordinates and more parameters."""
    src = p.space
    if src.ncoords != space.ncoords:
        raise ValueError("coordinate count mismatch")
    out = {}
    for k, v in p.terms.items():
        exps = list(src.unpack(k))
        new = exps[: src.ncoords] + [0] * len(space.params)
        for j, name in enumerate(src.params):
            new[space.param_index(name)] = exps[src.ncoords + j]
        out[space.pack(new)] = v
    return MultiPoly(space, out)


embed = _embed
