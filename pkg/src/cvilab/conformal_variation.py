"""Conformal jets of scalar invariants and what can be read off them.

For an invariant ``L`` of weight ``-2k`` and a direction ``Upsilon`` the jet
is ``F(t) = exp(2 k t Upsilon) L(exp(2 t Upsilon) g)``.  On conformally flat
backgrounds it is a polynomial in ``t``.

* Symbolic backend: ``t`` is a formal parameter.  The context must carry a
  potential equal to ``t * Upsilon`` (see :func:`jet_context`); coefficients
  are read off exactly and any exponential bucket still depending on ``t``
  raises :class:`~cvilab.exactnum.SurvivingBucketError`.
* Torus backend: ``F`` is sampled at rational nodes and the Vandermonde
  system is solved with an exact rational inverse.

The first coefficient is the conformal linearization ``S``.  In the
critical dimension ``n = 2k`` the coefficients give the diagonal operators
``L_j^j(u, ..., u) = j! c_j``, the rank and the conformal primitive.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .curvature_invariants import Invariant, get_invariant
from .exactnum import Context, MultiPoly, PolySpace
from .field_calculus import ConfBackground, symbolic_background
from .field_calculus.background import _cscale, is_zero_scalar
from .field_calculus.backends import SymbolicBackend, TorusBackend
from .field_calculus.grid import GridField

#: interpolation nodes for torus jets, in order of use
TORUS_NODES = tuple(
    Fraction(x) for x in ("0", "1/4", "-1/4", "1/2", "-1/2", "3/4", "-3/4", "1")
)


def _inv(L) -> Invariant:
    return L if isinstance(L, Invariant) else get_invariant(L)


# ---------------------------------------------------------------------------
# contexts for symbolic jets
# ---------------------------------------------------------------------------


def _as_poly(space: PolySpace, which) -> MultiPoly:
    if isinstance(which, MultiPoly):
        return MultiPoly(space, dict(which.terms)) if which.space != space else which
    if callable(which):
        return which(space)
    pad = space.nvars - space.ncoords
    return space.from_terms(
        {tuple(e) + (0,) * (pad if len(e) == space.ncoords else 0): c for e, c in which.items()}
    )


def jet_context(
    ncoords: int,
    directions: Sequence = (),
    base: Sequence = (),
    params: Sequence[str] = ("t",),
    plain: bool = False,
) -> Context:
    """Context with potentials ``base...`` then ``params[i] * directions[i]``.

    Directions and base potentials are term dicts ``{exponents: coeff}``,
    polynomials, or callables on the space.  Base potentials are named
    ``phi0, phi1, ...``; the scaled directions are named after their
    parameter (``"t"`` gives the potential ``tY``).  With ``plain=True`` the
    unscaled directions follow as ``Y0, Y1, ...``.
    """
    if len(directions) > len(params):
        raise ValueError("one parameter per direction")
    space = PolySpace(ncoords, tuple(params))
    pots = [_as_poly(space, b) for b in base]
    names = [f"phi{i}" for i in range(len(base))]
    for d, p in zip(directions, params):
        pots.append(space.param(p) * _as_poly(space, d))
        names.append(f"{p}Y")
    if plain:
        for i, d in enumerate(directions):
            pots.append(_as_poly(space, d))
            names.append(f"Y{i}")
    return Context(space, pots, names)


def _direction_key(bg: ConfBackground, direction):
    """Potential key of the t-scaled direction on a symbolic background."""
    return bg.backend.potential_key(direction)


# ---------------------------------------------------------------------------
# the jet
# ---------------------------------------------------------------------------


@dataclass
class ConformalJet:
    """Coefficients ``c_0..c_d`` of ``F(t)`` for one invariant and direction."""

    invariant: str
    k: int
    n: int
    coeffs: list
    exact: bool
    fit_residual: float = 0.0
    direction: object = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        """Largest ``j`` with ``c_j`` not identically zero (exact jets only)."""
        if not self.exact:
            raise TypeError("the degree of a sampled jet is not certified")
        nz = [j for j, c in enumerate(self.coeffs) if not is_zero_scalar(c)]
        return max(nz, default=-1)

    def zero_pattern(self) -> list[bool]:
        return [is_zero_scalar(c) for c in self.coeffs]

    def __call__(self, t):
        """Sum c_j t^j."""
        out = 0
        for j, c in enumerate(self.coeffs):
            if is_zero_scalar(c):
                continue
            term = c if j == 0 else _cscale(Fraction(t) ** j, c)
            out = term if is_zero_scalar(out) else out + term
        return out

    def diagonal_operator(self, j: int):
        """L_j^j(u, ..., u) = j! c_j (critical dimension only)."""
        if self.n != 2 * self.k:
            raise ValueError("j! c_j is the diagonal operator only in the critical dimension")
        if j >= len(self.coeffs):
            return 0
        return _cscale(math.factorial(j), self.coeffs[j])


def _symbolic_jet(inv: Invariant, direction, bg: ConfBackground, param: str) -> ConformalJet:
    be = bg.backend
    ctx = be.ctx
    key = _direction_key(bg, direction)
    if ctx.space.param_index(param) is None:
        raise ValueError(f"context has no parameter {param!r}")
    for q, p in zip(key, ctx.potentials):
        if q and p.subs(ctx.space.param_index(param), 0).terms:
            raise ValueError("the jet direction must be a t-scaled potential")
    curved = ConfBackground(bg.n, be, be.add_potentials(bg.phi, key))
    weight = ctx.exp(tuple(2 * inv.k * q for q in key))
    F = weight * inv.evaluate(curved)
    deg = F.param_degree(param)
    coeffs = [F.coeff_in_param(param, j) for j in range(max(deg, 0) + 1)]
    return ConformalJet(inv.name, inv.k, bg.n, coeffs, True, 0.0, direction)


def vandermonde_inverse(nodes: Sequence[Fraction]) -> list[list[Fraction]]:
    """Exact inverse of V[i][j] = nodes[i]^j (Gauss-Jordan over the rationals)."""
    m = len(nodes)
    if len(set(nodes)) != m:
        raise ValueError("nodes must be distinct")
    A = [[Fraction(x) ** j for j in range(m)] + [Fraction(int(i == r)) for r in range(m)] for i, x in enumerate(nodes)]
    for col in range(m):
        piv = next(r for r in range(col, m) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        for r in range(m):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[m:] for row in A]


def _torus_jet(inv: Invariant, upsilon: GridField, bg: ConfBackground, degree_bound: int) -> ConformalJet:
    npts = degree_bound + 2
    if npts > len(TORUS_NODES):
        raise ValueError(f"at most {len(TORUS_NODES) - 2} as degree bound on the torus")
    nodes = TORUS_NODES[:npts]
    upsilon = bg.lift(upsilon)
    samples = []
    for t in nodes:
        if t == 0:
            samples.append(bg.lift(inv.evaluate(bg)))
            continue
        g_t = bg.rescale(upsilon, t)
        w = upsilon.apply(lambda v, c=float(2 * inv.k * t): np.exp(c * v))
        samples.append(w * inv.evaluate(g_t))
    Vinv = vandermonde_inverse(nodes)
    coeffs = []
    for row in Vinv:
        acc = np.zeros(bg.backend.shape)
        for c, s in zip(row, samples):
            if c:
                acc = acc + float(c) * s.values
        coeffs.append(GridField(acc, (None,) * bg.m))
    top = coeffs[-1].max_abs()
    scale = max(c.max_abs() for c in coeffs[:-1]) or 1.0
    return ConformalJet(inv.name, inv.k, bg.n, coeffs[:-1], False, top / scale, upsilon)


def conformal_jet(L, upsilon, bg: ConfBackground, degree_bound: int | None = None, param: str = "t") -> ConformalJet:
    """Jet of ``L`` at ``bg`` in direction ``upsilon``.

    On the symbolic backend ``upsilon`` names the potential equal to
    ``param * Upsilon``; on the torus it is the grid field ``Upsilon``.
    """
    inv = _inv(L)
    if isinstance(bg.backend, SymbolicBackend):
        jet = _symbolic_jet(inv, upsilon, bg, param)
        if degree_bound is not None and jet.degree > degree_bound:
            raise ValueError(f"jet degree {jet.degree} exceeds the bound {degree_bound}")
        return jet
    if degree_bound is None:
        degree_bound = 2 * inv.k
    return _torus_jet(inv, upsilon, bg, degree_bound)


def jet_consistency(L, bg: ConfBackground, t, direction: str = "tY", plain: str = "Y0", param: str = "t") -> bool:
    """Direct evaluation at rational ``t`` equals sum c_j t^j (symbolic backend).

    The context must hold both ``param * Upsilon`` (``direction``) and
    ``Upsilon`` itself (``plain``); see ``jet_context(..., plain=True)``.
    """
    inv = _inv(L)
    ctx = bg.backend.ctx
    t = Fraction(t)
    jet = conformal_jet(inv, direction, bg, param=param)
    red, keep = ctx.reduced(param)
    ykey = bg.backend.potential_key(plain)
    direct_bg = bg.rescale(ykey, t)
    direct = ctx.exp(tuple(2 * inv.k * t * q for q in ykey)) * inv.evaluate(direct_bg)
    direct = direct.at_param_zero(param)
    value = jet(t)
    if is_zero_scalar(value):
        return direct.is_zero()
    return (direct - value.relift(direct.ctx)).is_zero()


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------


def _monomials(nvars: int, max_degree: int):
    out = []
    for d in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def sample_family(nvars: int = 3, size: int | None = 12, seed: int = 0, max_degree: int = 2) -> list[dict]:
    """Directions with coefficients in {-1, 0, 1} on the monomials of degree 1..max_degree.

    Constants are omitted: a constant shift of the direction leaves every
    jet unchanged by weight homogeneity.  ``size=None`` enumerates the whole
    family; otherwise a seeded sample of distinct nonzero members, always
    led by the pure square ``x_0^2`` and the mixed term ``x_0 x_1``.
    """
    mons = _monomials(nvars, max_degree)
    total = 3 ** len(mons) - 1
    if size is None:
        out = []
        for cs in itertools.product((-1, 0, 1), repeat=len(mons)):
            if any(cs):
                out.append({m: c for m, c in zip(mons, cs) if c})
        return out
    rng = random.Random(seed)
    seeds = []
    sq = tuple(2 if i == 0 else 0 for i in range(nvars))
    seeds.append({sq: 1})
    if nvars > 1:
        seeds.append({tuple(1 if i < 2 else 0 for i in range(nvars)): 1})
    seen = {tuple(sorted(d.items())) for d in seeds}
    out = list(seeds)[:size]
    while len(out) < min(size, total):
        cs = [rng.choice((-1, 0, 1)) for _ in mons]
        d = {m: c for m, c in zip(mons, cs) if c}
        key = tuple(sorted(d.items()))
        if d and key not in seen:
            seen.add(key)
            out.append(d)
    return out


def _orbit(d: dict, nvars: int) -> set:
    """Images of a direction under axis permutations, axis reflections and negation."""
    out = set()
    for perm in itertools.permutations(range(nvars)):
        for signs in itertools.product((1, -1), repeat=nvars):
            for glob in (1, -1):
                img = []
                for e, c in d.items():
                    sgn = glob
                    for i, ei in enumerate(e):
                        if ei % 2 and signs[i] < 0:
                            sgn = -sgn
                    img.append((tuple(e[perm[i]] for i in range(nvars)), sgn * c))
                out.add(tuple(sorted(img)))
    return out


def orbit_representatives(family: Sequence[dict], nvars: int) -> list[dict]:
    """One member per orbit of the Euclidean symmetries of the coordinate cube.

    A natural invariant commutes with isometries and negating the direction
    flips ``t``, so the zero pattern of the jet is constant on each orbit.
    """
    seen: set = set()
    out = []
    for d in family:
        if tuple(sorted(d.items())) not in seen:
            seen |= _orbit(d, nvars)
            out.append(d)
    return out


@dataclass
class RankResult:
    invariant: str
    n: int
    family_size: int
    certified_zero: list[int]
    witness_degree: int
    max_degree_seen: int
    patterns: list = field(default_factory=list, repr=False)
    evaluated: int = 0

    @property
    def rank(self) -> int | None:
        higher = range(self.witness_degree + 1, self.max_degree_seen + 1)
        if all(j in self.certified_zero for j in higher):
            return self.witness_degree + 1
        return None


def rank_witness(
    L,
    n: int | None = None,
    family: Sequence | None = None,
    nvars: int = 3,
    base: Sequence = (),
    use_symmetry: bool = True,
) -> RankResult:
    """Certify vanishing jet coefficients on a family of polynomial directions.

    ``certified_zero`` lists the ``j`` whose coefficient is identically zero
    for every member; ``witness_degree`` is the largest ``j`` some member
    makes nonzero.  Only the critical dimension ``n = 2k`` is accepted.
    On a flat base the family is first reduced to symmetry-orbit
    representatives (see :func:`orbit_representatives`).
    """
    inv = _inv(L)
    n = 2 * inv.k if n is None else n
    if n != 2 * inv.k:
        raise ValueError(f"rank is computed in the critical dimension {2 * inv.k}, not {n}")
    if not inv.supports(n):
        raise ValueError(f"{inv.name} is not available in dimension {n}")
    family = sample_family(nvars) if family is None else family
    if not family:
        raise ValueError("empty direction family")
    todo = orbit_representatives(family, nvars) if use_symmetry and not base else list(family)
    patterns = []
    for d in todo:
        ctx = jet_context(nvars, [d], base)
        bg = symbolic_background(n, ctx, 0 if base else None)
        jet = conformal_jet(inv, "tY", bg)
        patterns.append(jet.zero_pattern())
    top = max(len(p) for p in patterns) - 1
    top = max(top, 2 * inv.k)
    certified = [j for j in range(top + 1) if all(j >= len(p) or p[j] for p in patterns)]
    nonzero = [j for j in range(top + 1) if j not in certified]
    return RankResult(
        inv.name, n, len(family), certified, max(nonzero, default=-1), top, patterns, len(todo)
    )


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------


def linearization(L, direction, bg: ConfBackground):
    """S(w): the t-linear coefficient of the jet in direction ``w``."""
    jet = conformal_jet(L, direction, bg)
    return jet.coeffs[1] if len(jet.coeffs) > 1 else 0


def linearization_of_one_is_zero(L, n: int, ncoords: int = 2, base=None) -> bool:
    """S(1) = 0 exactly, at the background exp(2 phi) delta for a polynomial ``phi``."""
    base = base if base is not None else {(2,) + (0,) * (ncoords - 1): Fraction(1, 2), (1,) * min(ncoords, 2) + (0,) * (ncoords - 2): 1}
    ctx = jet_context(ncoords, [{(0,) * ncoords: 1}], [base])
    bg = symbolic_background(n, ctx, "phi0")
    S1 = linearization(L, "tY", bg)
    return is_zero_scalar(S1)


@dataclass
class LinearizationReport:
    invariant: str
    pairing_uv: float
    pairing_vu: float
    relative: float
    s_of_one: float
    fit_residual: float


def linearization_selfadjoint_check(L, bg: ConfBackground, u: GridField, v: GridField) -> LinearizationReport:
    """|int u S(v) - int v S(u)| / scale on a torus background (against dvol_g)."""
    if not isinstance(bg.backend, TorusBackend):
        raise TypeError("the pairing check runs on the torus backend")
    inv = _inv(L)
    ju = conformal_jet(inv, u, bg)
    jv = conformal_jet(inv, v, bg)
    Su, Sv = ju.coeffs[1], jv.coeffs[1]
    a = bg.integrate_g(u * Sv)
    b = bg.integrate_g(v * Su)
    scale = max(abs(a), abs(b), 1e-300)
    one = bg.const(1.0)
    s1 = conformal_jet(inv, one, bg).coeffs[1].max_abs()
    return LinearizationReport(inv.name, a, b, abs(a - b) / scale, s1, max(ju.fit_residual, jv.fit_residual))


def l1ell_apply(L, ell: int, direction, bg: ConfBackground, u):
    """L_1^l(u) = S(u) + (l-1)(n-2k)/l * L u, with S taken along ``direction`` (the t-scaled u)."""
    inv = _inv(L)
    if ell < 1:
        raise ValueError("l must be at least 1")
    S = linearization(inv, direction, bg)
    c = Fraction((ell - 1) * (bg.n - 2 * inv.k), ell)
    rest = _cscale(c, inv.evaluate(bg) * bg.lift(u)) if c else 0
    if is_zero_scalar(S):
        return rest
    return S if is_zero_scalar(rest) else S + rest


def l1ell_check(L, ell: int, bg: ConfBackground):
    """L_1^l(1) - (n-2k)(l-1)/l L; identically zero.  ``bg`` must carry the potential ``t * 1`` named ``tY``."""
    inv = _inv(L)
    val = l1ell_apply(inv, ell, "tY", bg, 1)
    expected = _cscale(Fraction((bg.n - 2 * inv.k) * (ell - 1), ell), inv.evaluate(bg))
    if is_zero_scalar(val):
        return -expected if not is_zero_scalar(expected) else bg.const(0)
    return val - expected if not is_zero_scalar(expected) else val


def l1ell_background(n: int, ncoords: int = 2, base=None) -> ConfBackground:
    """A curved symbolic background with the constant direction ``tY = t``."""
    base = base if base is not None else {(2,) + (0,) * (ncoords - 1): Fraction(1, 2), (0,) * (ncoords - 1) + (3,): Fraction(1, 3)}
    ctx = jet_context(ncoords, [{(0,) * ncoords: 1}], [base])
    return symbolic_background(n, ctx, "phi0")


# ---------------------------------------------------------------------------
# recovery
# ---------------------------------------------------------------------------


def recovery_targets(n: int) -> dict:
    """Invariants recovered by the operator library, keyed by operator name."""
    from .curvature_invariants import INVARIANTS, combination

    out = {}
    if n > 2:
        out["D2"] = (INVARIANTS["J"].scaled(lambda m: Fraction(12, m - 2), "12/(n-2) J"), 2)
    if n > 4:
        out["D4"] = (
            combination(
                [
                    (lambda m: Fraction(24 * (m - 1), (m - 4) * (m + 2)), INVARIANTS["Q4"]),
                    (lambda m: Fraction(8 * (m - 4), m + 2), INVARIANTS["sigma2"]),
                ],
                "D4 target",
            ),
            2,
        )
        out["L4"] = (INVARIANTS["sigma2"], 3)
    if n > 6:
        out["L6"] = (INVARIANTS["sigma3"], 5)
    return out


def recovery_check(D, L, ell: int, n: int, direction, ctx: Context, param: str = "t"):
    """((n-2k)/(l+1))^l exp(b t Y) L(exp(2tY) delta) - D(exp(a t Y), ...) on the flat background.

    ``direction`` names the potential ``t * Upsilon`` in ``ctx``.  The
    result is an exact field, polynomial in ``t``, identically zero when
    the operator recovers the invariant.
    """
    from .operator_library import bidegree

    inv = _inv(L)
    k = inv.k
    if n == 2 * k:
        raise ValueError("recovery needs n != 2k")
    flat = symbolic_background(n, ctx)
    key = flat.backend.potential_key(direction)
    a, b = bidegree(ell, k, n)
    curved = ConfBackground(n, flat.backend, key)
    lhs = ctx.exp(tuple(b * q for q in key)) * inv.evaluate(curved)
    lhs = lhs.scale(a**ell)
    u = ctx.exp(tuple(a * q for q in key))
    rhs = D([u] * ell, flat)
    return lhs - flat.lift(rhs)


# ---------------------------------------------------------------------------
# primitive
# ---------------------------------------------------------------------------


def _path(mode: str):
    if mode in ("path", "linear"):
        return (lambda s: s), (lambda s: 1.0), 1
    if mode == "smoothstep":
        return (lambda s: s * s * (3 - 2 * s)), (lambda s: 6 * s * (1 - s)), 3
    raise ValueError(f"unknown path {mode!r}")


def conformal_primitive(L, u: GridField, bg: ConfBackground, mode: str = "closed") -> float:
    """Conformal primitive of ``L`` at ``u`` relative to ``bg`` (critical dimension, torus).

    ``mode`` is ``"closed"`` (sum over jet coefficients), ``"path"`` /
    ``"linear"`` (s -> s u) or ``"smoothstep"`` (s -> s^2 (3 - 2s) u); path
    modes integrate in ``s`` by Gauss-Legendre, exact for the polynomial
    integrand.
    """
    inv = _inv(L)
    if bg.n != 2 * inv.k:
        raise ValueError("the primitive is defined in the critical dimension")
    if not isinstance(bg.backend, TorusBackend):
        raise TypeError("the primitive is evaluated by quadrature on the torus")
    u = bg.lift(u)
    if u.is_zero():
        return 0.0
    if mode == "closed":
        jet = conformal_jet(inv, u, bg)
        total = 0.0
        for j, c in enumerate(jet.coeffs):
            total += bg.integrate_g(u * c) / (j + 1)
        return total
    p, dp, pdeg = _path(mode)
    deg = 2 * inv.k * pdeg + 1
    nodes, weights = np.polynomial.legendre.leggauss(deg // 2 + 1)
    total = 0.0
    for x, w in zip(nodes, weights):
        s = 0.5 * (x + 1.0)
        g_s = _rescale_float(bg, u, p(s))
        val = g_s.integrate_g(u * inv.evaluate(g_s))
        total += 0.5 * w * dp(s) * val
    return float(total)


def _rescale_float(bg: ConfBackground, u: GridField, t: float) -> ConfBackground:
    return ConfBackground(bg.n, bg.backend, bg.phi + u * float(t))


# ---------------------------------------------------------------------------
# second-order polarization
# ---------------------------------------------------------------------------


def polarized_second_coefficient(L, u: GridField, v: GridField, bg: ConfBackground):
    """L_2^2(u, v) = c_2(u + v) - c_2(u) - c_2(v) (critical dimension, torus)."""
    inv = _inv(L)
    if bg.n != 2 * inv.k:
        raise ValueError("critical dimension only")
    c = [conformal_jet(inv, w, bg).coeffs[2] for w in (u + v, u, v)]
    return c[0] - c[1] - c[2]


def mixed_jet_symmetry(L, d1, d2, n: int, ncoords: int) -> tuple[bool, bool]:
    """Second-order polarization checks on the flat background (exact).

    Returns ``(symmetric, polarizes)``: the ``s t`` coefficient of the jet
    along ``s u + t v`` equals the one along ``s v + t u``, and it equals
    ``c_2(u + v) - c_2(u) - c_2(v)``.
    """
    inv = _inv(L)
    space = PolySpace(ncoords, ("s", "t", "r"))
    U, V = _as_poly(space, d1), _as_poly(space, d2)
    s_, t_, r_ = (space.param(p) for p in ("s", "t", "r"))
    pots = [s_ * U, t_ * V, s_ * V, t_ * U, r_ * U, r_ * V]
    ctx = Context(space, pots, ["sU", "tV", "sV", "tU", "rU", "rV"])
    bg = symbolic_background(n, ctx)
    be = bg.backend

    def field_along(*names):
        key = tuple(sum(c) for c in zip(*(be.potential_key(nm) for nm in names)))
        curved = ConfBackground(n, be, key)
        return ctx.exp(tuple(2 * inv.k * q for q in key)) * inv.evaluate(curved)

    def coeff(F, which):
        for p, j in which:
            F = F.coeff_in_param(p, j)
        return F

    common = Context(space, [], [])

    def flat(F):
        if any(any(q) for q in F.terms):
            raise ValueError("exponential bucket survived on the flat background")
        return F.relift(common, lambda q: ())

    uv = flat(coeff(field_along("sU", "tV"), [("s", 1), ("t", 1)]))
    vu = flat(coeff(field_along("sV", "tU"), [("s", 1), ("t", 1)]))
    both = flat(coeff(field_along("rU", "rV"), [("r", 2)]))
    cu = flat(coeff(field_along("rU"), [("r", 2)]))
    cv = flat(coeff(field_along("rV"), [("r", 2)]))
    return (uv - vu).is_zero(), (uv - (both - cu - cv)).is_zero()
