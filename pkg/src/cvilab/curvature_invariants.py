"""Scalar conformal invariants of conformally flat backgrounds.

Each :class:`Invariant` is a named formula in the Schouten tensor ``P``,
its trace ``J`` and curved differential operators, evaluated on a
:class:`~cvilab.field_calculus.ConfBackground`.  On these backgrounds the
Weyl and Cotton tensors vanish, so ``v_3 = sigma_3(P)``.

Shared pieces (``J^2``, ``|P|^2``, ...) are cached on the background.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .field_calculus import ConfBackground
from .field_calculus.background import is_zero_scalar

F = Fraction


class UnsupportedInvariant(ValueError):
    """The invariant is not defined in the requested dimension."""


def _cached(bg: ConfBackground, key, build):
    cache = bg._cache
    if key not in cache:
        cache[key] = build()
    return cache[key]


def _c(c, x):
    """Rational constant times a scalar field."""
    c = F(c)
    if c == 0 or is_zero_scalar(x):
        return 0
    if c == 1:
        return x
    if isinstance(x, (int, Fraction)):
        return c * x
    return x * (float(c) if type(x).__name__ == "GridField" else c)


def _plus(*terms):
    out = 0
    for t in terms:
        if is_zero_scalar(t):
            continue
        out = t if is_zero_scalar(out) else out + t
    return out


# -- building blocks ---------------------------------------------------------


def J2(bg):
    return _cached(bg, "J^2", lambda: bg.J() * bg.J())


def J3(bg):
    return _cached(bg, "J^3", lambda: J2(bg) * bg.J())


def lap_J2(bg):
    return _cached(bg, "lap J^2", lambda: bg.laplacian(J2(bg)))


def sigma2(bg):
    return _cached(bg, "sigma2", lambda: _c(F(1, 2), J2(bg) - bg.P_norm_sq()))


def v3(bg):
    return bg.sigma_P(3)


def div_P_grad_J(bg):
    """delta(P(grad J))."""

    def build():
        dJ = bg.grad(bg.J())
        return bg.divergence(bg.raise_apply(bg.schouten(), dJ))

    return _cached(bg, "div P dJ", build)


def div_T1_grad_J(bg):
    """delta(T_1(grad J)) with T_1 = J g - P."""

    def build():
        dJ = bg.grad(bg.J())
        PdJ = bg.raise_apply(bg.schouten(), dJ)
        J = bg.J()
        return bg.divergence([J * a - b for a, b in zip(dJ, PdJ)])

    return _cached(bg, "div T1 dJ", build)


# -- the invariants ------------------------------------------------------------


def _J(bg):
    return bg.J()


def _Q4(bg):
    n = bg.n
    return _plus(-bg.laplacian(bg.J()), _c(-2, bg.P_norm_sq()), _c(F(n, 2), J2(bg)))


def _L1(bg):
    n = bg.n
    return _plus(-lap_J2(bg), _c(F(n - 6, 3), J3(bg)))


def _L2(bg):
    n = bg.n
    return _plus(
        -bg.laplacian(bg.P_norm_sq()),
        _c(-2, div_P_grad_J(bg)),
        -lap_J2(bg),
        _c(n - 6, bg.J() * bg.P_norm_sq()),
    )


def _B0(bg):
    n = bg.n
    return _plus(
        _c(F(-3, 4), lap_J2(bg)),
        bg.laplacian(sigma2(bg)),
        div_T1_grad_J(bg),
        _c(F(-(n - 6), 4), J3(bg)),
        _c(F(n - 6, 2), bg.J() * bg.P_norm_sq()),
        _c(-6, v3(bg)),
    )


def _C0(bg):
    n = bg.n
    return _plus(
        _c(F(-2, n + 2), lap_J2(bg)),
        _c(F(2 * (n - 6), 3 * (n + 2)), J3(bg)),
        _c(F(4 * (n + 2), n - 2), v3(bg)),
    )


def _I1(bg):
    n = bg.n
    return _plus(
        -lap_J2(bg),
        _c(F(n - 6, 3), J3(bg)),
        _c(F(2 * (n + 2) ** 2, n - 2), v3(bg)),
    )


def _I2(bg):
    n = bg.n
    return _plus(
        -bg.laplacian(sigma2(bg)),
        -div_T1_grad_J(bg),
        _c(n - 6, bg.J() * sigma2(bg)),
        _c(F(3 * (n * n + 8 * n - 4), 2 * (n - 2)), v3(bg)),
    )


@dataclass(frozen=True)
class Invariant:
    """A natural scalar of weight ``-2k`` given by an explicit formula."""

    name: str
    k: int
    formula: Callable[[ConfBackground], object] = field(compare=False, repr=False)
    min_dim: int = 3
    excluded_dims: tuple[int, ...] = ()

    @property
    def weight(self) -> int:
        return -2 * self.k

    def supports(self, n: int) -> bool:
        return n >= self.min_dim and n not in self.excluded_dims

    def evaluate(self, bg: ConfBackground):
        if not self.supports(bg.n):
            raise UnsupportedInvariant(f"{self.name} is not available in dimension {bg.n}")
        val = self.formula(bg)
        if isinstance(val, (int, Fraction)):
            return bg.const(val)
        return val

    def __call__(self, bg: ConfBackground):
        return self.evaluate(bg)

    def scaled(self, coeff: Callable[[int], Fraction] | Fraction, name: str | None = None) -> "Invariant":
        """``coeff(n) * self``; ``coeff`` may be a constant."""
        cf = coeff if callable(coeff) else (lambda n, c=F(coeff): c)
        return combination([(cf, self)], name or f"c*{self.name}")


def combination(terms: Sequence[tuple], name: str) -> Invariant:
    """Linear combination sum_i c_i(n) L_i of invariants of one weight."""
    ks = {inv.k for _, inv in terms}
    if len(ks) != 1:
        raise ValueError("can only combine invariants of equal weight")
    terms = tuple((c if callable(c) else (lambda n, cc=F(c): cc), inv) for c, inv in terms)

    def formula(bg):
        return _plus(*(_c(c(bg.n), inv.evaluate(bg)) for c, inv in terms))

    min_dim = max(inv.min_dim for _, inv in terms)
    excluded = tuple(sorted({d for _, inv in terms for d in inv.excluded_dims}))
    return Invariant(name, ks.pop(), formula, min_dim, excluded)


def sigma_k_invariant(k: int) -> Invariant:
    """sigma_k of the Schouten tensor."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return Invariant("sigma1", 1, _J)
    if k == 2:
        return Invariant("sigma2", 2, sigma2)
    return Invariant(f"sigma{k}", k, lambda bg, k=k: bg.sigma_P(k))


INVARIANTS: dict[str, Invariant] = {
    "J": Invariant("J", 1, _J),
    "sigma2": sigma_k_invariant(2),
    "sigma3": sigma_k_invariant(3),
    "v3": Invariant("v3", 3, v3),
    "Q4": Invariant("Q4", 2, _Q4),
    "L1": Invariant("L1", 3, _L1),
    "L2": Invariant("L2", 3, _L2),
    "B0": Invariant("B0", 3, _B0),
    "C0": Invariant("C0", 3, _C0, excluded_dims=(2,)),
    "I1": Invariant("I1", 3, _I1, excluded_dims=(2,)),
    "I2": Invariant("I2", 3, _I2, excluded_dims=(2,)),
}


def get_invariant(name: str) -> Invariant:
    """Look up an invariant by name; ``sigma_k`` / ``sigmaK`` forms build sigma_K."""
    if name in INVARIANTS:
        return INVARIANTS[name]
    key = name.replace("sigma_", "sigma")
    if key in INVARIANTS:
        return INVARIANTS[key]
    if key.startswith("sigma") and key[5:].isdigit():
        return sigma_k_invariant(int(key[5:]))
    raise KeyError(f"unknown invariant {name!r}; known: {sorted(INVARIANTS)}")


def evaluate_invariant(name: str | Invariant, bg: ConfBackground):
    inv = name if isinstance(name, Invariant) else get_invariant(name)
    return inv.evaluate(bg)


# -- linear relations among weight -6 invariants ------------------------------


def _relations(n: int):
    """(label, lhs name, [(coeff, name), ...]) with lhs = sum coeff * name."""
    return [
        ("B0 = -3/4 L1 + 1/2 L2 - 6 v3", "B0", [(F(-3, 4), "L1"), (F(1, 2), "L2"), (F(-6), "v3")]),
        ("C0 = 2/(n+2) L1 + 4(n+2)/(n-2) v3", "C0", [(F(2, n + 2), "L1"), (F(4 * (n + 2), n - 2), "v3")]),
        ("I1 = (n+2)/2 C0", "I1", [(F(n + 2, 2), "C0")]),
        ("I2 = 3(n+2)/8 C0 - B0", "I2", [(F(3 * (n + 2), 8), "C0"), (F(-1), "B0")]),
    ]


@dataclass
class RelationResult:
    label: str
    residual: object
    identically_zero: bool
    max_abs: float | None = None
    point_values: list = field(default_factory=list)


def _magnitude(x) -> float:
    if isinstance(x, (int, Fraction)):
        return abs(float(x))
    return x.max_abs() if hasattr(x, "max_abs") else 0.0


def relations_check(bg: ConfBackground, sample_points: Sequence | None = None, tol: float = 1e-9) -> list[RelationResult]:
    """Residuals of the four linear relations among L1, L2, v3, B0, C0, I1, I2.

    Exact backgrounds certify identically zero residuals; the optional
    rational ``sample_points`` add bucketwise evaluations as a redundancy
    check.  Grid backgrounds report the max abs residual and compare it with
    ``tol`` times the largest term of the relation.
    """
    n = bg.n
    if n in (1, 2, 4):
        raise UnsupportedInvariant("the relations need n not in {1, 2, 4}")
    out = []
    for label, lhs, rhs in _relations(n):
        res = INVARIANTS[lhs].evaluate(bg)
        scale = _magnitude(res)
        for c, name in rhs:
            term = _c(c, INVARIANTS[name].evaluate(bg))
            scale = max(scale, _magnitude(term))
            res = res - term
        if bg.exact:
            pts = [res.evaluate(p) for p in (sample_points or [])] if not is_zero_scalar(res) else [
                {} for _ in (sample_points or [])
            ]
            zero = is_zero_scalar(res) and all(not v for v in pts)
            out.append(RelationResult(label, res, zero, None, pts))
        else:
            m = _magnitude(res)
            out.append(RelationResult(label, res, m <= tol * max(scale, 1.0), m))
    return out
