"""Band-limited real scalars on the unit-period flat torus.

A :class:`GridField` carries its samples on a uniform grid together with a
per-axis band limit (largest integer frequency present, or ``None`` when
unknown).  Products add bands, derivatives keep them.  Spectral derivatives
refuse to run when the declared band reaches the Nyquist frequency; fields
of unknown band must have a negligible spectral tail instead.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.fft as sfft

#: relative amplitude allowed in the top modes of a field with unknown band
TAIL_TOL = 1e-5


class AliasingError(ArithmeticError):
    """A spectral operation would alias (band limit at or above Nyquist)."""


def _as_float(c) -> float:
    if isinstance(c, float):
        return c
    if isinstance(c, (numbers.Number, Fraction)) or type(c).__name__ in ("mpq", "mpz"):
        return float(c)
    raise TypeError(f"cannot use {type(c).__name__} as a grid scalar")


def _combine_add(a, b):
    return tuple(None if x is None or y is None else max(x, y) for x, y in zip(a, b))


def _combine_mul(a, b):
    return tuple(None if x is None or y is None else x + y for x, y in zip(a, b))


class GridField:
    """Samples of a real function on a torus grid of shape ``values.shape``."""

    __slots__ = ("values", "band")

    def __init__(self, values, band: Sequence[int | None] | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim == 0:
            raise ValueError("a grid field needs at least one axis")
        self.values = values
        if band is None:
            band = (None,) * values.ndim
        band = tuple(band)
        if len(band) != values.ndim:
            raise ValueError("one band entry per axis required")
        self.band = band

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, shape: Sequence[int], c) -> "GridField":
        return cls(np.full(tuple(shape), _as_float(c)), (0,) * len(shape))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    # -- arithmetic -------------------------------------------------------
    def _other(self, other):
        if isinstance(other, GridField):
            if other.shape != self.shape:
                raise ValueError(f"grid shape mismatch {self.shape} vs {other.shape}")
            return other.values, other.band
        try:
            c = _as_float(other)
        except TypeError:
            return None
        return c, (0,) * self.ndim

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return GridField(self.values + o[0], _combine_add(self.band, o[1]))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return GridField(self.values - o[0], _combine_add(self.band, o[1]))

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return GridField(o[0] - self.values, _combine_add(self.band, o[1]))

    def __neg__(self):
        return GridField(-self.values, self.band)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if isinstance(other, GridField):
            return GridField(self.values * o[0], _combine_mul(self.band, o[1]))
        return GridField(self.values * o[0], self.band)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        band = tuple(None if b is None else b * e for b in self.band)
        return GridField(self.values**e, band)

    def apply(self, func) -> "GridField":
        """Pointwise ``func``; the band becomes unknown."""
        return GridField(func(self.values), (None,) * self.ndim)

    def exp(self) -> "GridField":
        return self.apply(np.exp)

    def log(self) -> "GridField":
        if np.any(self.values <= 0):
            raise ValueError("logarithm of a nonpositive field")
        return self.apply(np.log)

    def with_band(self, band) -> "GridField":
        return GridField(self.values, band)

    # -- spectral guard ---------------------------------------------------
    def check_resolved(self, axis: int, limit: float | None = None) -> None:
        """Raise :class:`AliasingError` unless frequencies along ``axis`` stay below ``limit``.

        ``limit`` defaults to Nyquist, ``N/2``.
        """
        N = self.shape[axis]
        limit = N / 2 if limit is None else limit
        b = self.band[axis]
        if b is not None:
            if b >= limit:
                raise AliasingError(
                    f"band {b} on axis {axis} is not below {limit:g} (N = {N})"
                )
            return
        if N == 1:
            return
        amp = np.abs(sfft.rfft(self.values, axis=axis))
        amp = np.moveaxis(amp, axis, 0).reshape(amp.shape[axis], -1).max(axis=1)
        top = amp.max()
        if top == 0.0:
            return
        cut = max(1, int(math.floor(limit)) - max(1, N // 8))
        tail = amp[cut:].max() if cut < amp.size else 0.0
        if tail > TAIL_TOL * top:
            raise AliasingError(
                f"unresolved spectral tail on axis {axis}: {tail / top:.2e} relative (N = {N})"
            )

    # -- calculus ---------------------------------------------------------
    def partial(self, axis: int) -> "GridField":
        """Spectral derivative along ``axis`` (unit period)."""
        if not 0 <= axis < self.ndim:
            raise IndexError(f"axis {axis} out of range for {self.ndim} grid axes")
        N = self.shape[axis]
        if N == 1:
            return GridField(np.zeros(self.shape), (0,) * self.ndim)
        self.check_resolved(axis)
        F = sfft.rfft(self.values, axis=axis)
        k = np.arange(F.shape[axis], dtype=float)
        if N % 2 == 0:
            k[-1] = 0.0
        shape = [1] * self.ndim
        shape[axis] = k.size
        F *= (2j * np.pi * k).reshape(shape)
        return GridField(sfft.irfft(F, n=N, axis=axis), self.band)

    def integrate(self) -> float:
        """Trapezoidal mean over the unit torus (volume one)."""
        for axis in range(self.ndim):
            self.check_resolved(axis, limit=self.shape[axis])
        return float(self.values.mean())

    # -- inspection -------------------------------------------------------
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def __repr__(self):
        return f"GridField(shape={self.shape}, band={self.band})"


def grid_axes(shape: Sequence[int]) -> list[np.ndarray]:
    """Coordinate arrays x_i = j/N_i broadcast to the full grid."""
    lin = [np.arange(N) / N for N in shape]
    return list(np.meshgrid(*lin, indexing="ij"))


def coordinate_field(shape: Sequence[int], func, band=None) -> GridField:
    """Sample ``func(*coords)`` on the grid."""
    return GridField(np.asarray(func(*grid_axes(shape)), dtype=float) + np.zeros(tuple(shape)), band)


def trig_mode(shape: Sequence[int], freq: Sequence[int], phase: float = 0.0, amplitude: float = 1.0) -> GridField:
    """amplitude * cos(2 pi (freq . x) + phase)."""
    X = grid_axes(shape)
    arg = sum(2 * np.pi * f * x for f, x in zip(freq, X))
    band = tuple(abs(int(f)) for f in freq)
    return GridField(amplitude * np.cos(arg + phase) + np.zeros(tuple(shape)), band)


def random_trig_field(
    shape: Sequence[int],
    band: int | Sequence[int],
    rng: np.random.Generator,
    amplitude: float = 1.0,
    offset: float = 0.0,
    nterms: int | None = None,
) -> GridField:
    """Random real trigonometric polynomial with per-axis frequency at most ``band``.

    Axes of size one carry no frequencies.
    """
    shape = tuple(shape)
    if isinstance(band, int):
        band = tuple(0 if N == 1 else band for N in shape)
    band = tuple(0 if N == 1 else b for N, b in zip(shape, band))
    freqs = [f for f in np.ndindex(*[2 * b + 1 for b in band])]
    freqs = [tuple(i - b for i, b in zip(f, band)) for f in freqs]
    if nterms is not None and nterms < len(freqs):
        idx = rng.choice(len(freqs), size=nterms, replace=False)
        freqs = [freqs[i] for i in sorted(idx)]
    X = grid_axes(shape)
    total = np.full(shape, float(offset))
    for f in freqs:
        arg = sum(2 * np.pi * fi * x for fi, x in zip(f, X))
        a, b = rng.normal(size=2)
        total = total + amplitude * (a * np.cos(arg) + b * np.sin(arg)) / math.sqrt(len(freqs))
    return GridField(total, band)
