"""Finite periodized signal model, windows, shifts and covariant derivatives.

A function on the line is modelled by its complex samples on the uniform
periodic grid

    t_j = -P/2 + j/s,   j = 0 .. n-1,   n = s * P,

with s samples per unit over one period of P units.  Every inner product
carries the quadrature weight 1/s, so ``inner(f, g)`` approximates the
integral of f * conj(g) and circular index shifts realize exact time
shifts by multiples of 1/s.

The two covariant derivatives are

    nabla1: f(t) -> (2 pi i / theta) * t * f(t)      (pointwise multiplier)
    nabla2: f(t) -> f'(t)                            (spectral derivative)

Grid frequencies are the multiples of 1/P; a unit frequency shift is a
shift by P bins in the discrete Fourier domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import math

import numpy as np

from .errors import GridMismatchError, ParameterError, SizeError

MAX_SAMPLES = 1 << 22

WINDOW_KINDS = ("gaussian", "indicator", "hermite", "bspline")


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: ``s`` samples per unit, ``P`` units per period."""

    s: int
    P: int

    def __post_init__(self):
        if self.s < 1 or self.P < 1:
            raise ParameterError(f"grid needs s >= 1 and P >= 1, got s={self.s}, P={self.P}")
        if self.s * self.P > MAX_SAMPLES:
            raise SizeError(f"grid size {self.s * self.P} exceeds limit {MAX_SAMPLES}")

    @property
    def n(self) -> int:
        return self.s * self.P

    @cached_property
    def points(self) -> np.ndarray:
        """Grid points t_j = -P/2 + j/s (read-only)."""
        t = np.arange(self.n) / self.s - self.P / 2.0
        t.setflags(write=False)
        return t


@dataclass(frozen=True)
class Signal:
    """Complex samples on a :class:`GridSpec`; treated as immutable."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(f"expected {self.grid.n} samples, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class LatticeSpec:
    """Time-frequency lattice theta*Z x Z mapped onto a grid.

    theta = p/q must be a rational in (0, 1] with q dividing s, so the
    time step theta maps to an integer number of samples.  Operations
    that enumerate a full fundamental block additionally need the time
    shifts to tile the period, i.e. P*q/p integral; that is checked
    lazily by :meth:`time_shift_count` because pointwise shift and
    module-action operations are meaningful without it.
    """

    theta: Fraction
    grid: GridSpec

    def __post_init__(self):
        th = Fraction(self.theta)
        if not (0 < th <= 1):
            raise ParameterError(f"theta must lie in (0, 1], got {th}")
        if (self.grid.s * th.numerator) % th.denominator != 0:
            raise ParameterError(
                f"theta*s = {th}*{self.grid.s} is not an integer; "
                f"the denominator of theta must divide s"
            )
        object.__setattr__(self, "theta", th)

    @property
    def time_step(self) -> int:
        """Samples per lattice time shift: theta * s."""
        return self.grid.s * self.theta.numerator // self.theta.denominator

    @property
    def frequency_shift_count(self) -> int:
        """Frequency shifts per period: s."""
        return self.grid.s

    def time_shift_count(self) -> int:
        """Time shifts per period, n / (theta * s); raises if the lattice does not tile."""
        p, q = self.theta.numerator, self.theta.denominator
        if (self.grid.P * q) % p != 0:
            raise ParameterError(
                f"lattice with theta={self.theta} does not tile the period P={self.grid.P}: "
                f"P*q/p = {self.grid.P}*{q}/{p} is not an integer"
            )
        return self.grid.P * q // p

    def block_size(self) -> int:
        return self.time_shift_count() * self.frequency_shift_count


def make_grid(s: int, P: int) -> GridSpec:
    """Build the periodic grid with ``s`` samples per unit over ``P`` units."""
    return GridSpec(int(s), int(P))


def _gaussian_values(t: np.ndarray) -> np.ndarray:
    return 2.0 ** 0.25 * np.exp(-np.pi * t * t)


def _hermite_values(t: np.ndarray, m: int) -> np.ndarray:
    # Orthonormal Hermite functions in dt: psi_m(t) = (2pi)^(1/4) phi_m(sqrt(2pi) t)
    # with phi_m the unit-variance Hermite functions; m = 0 is the Gaussian window.
    x = np.sqrt(2.0 * np.pi) * t
    coeffs = np.zeros(m + 1)
    coeffs[m] = 1.0
    h = np.polynomial.hermite.hermval(x, coeffs)
    norm = math.sqrt((2.0 ** m) * math.factorial(m) * math.sqrt(math.pi))
    return (2.0 * np.pi) ** 0.25 * h * np.exp(-x * x / 2.0) / norm


def make_window(kind: str, grid: GridSpec, param: int | None = None) -> Signal:
    """Construct a named window, L2-normalized to 1.

    Kinds: ``gaussian`` (2^(1/4) exp(-pi t^2)), ``indicator`` (characteristic
    function of [0, 1)), ``hermite`` with index ``param`` >= 0 (index 0 equals
    the gaussian), ``bspline`` of order ``param`` >= 1 (order 1 equals the
    indicator; higher orders are iterated self-convolutions on [0, order),
    renormalized).  Gaussian, hermite and indicator carry their natural
    normalization, which is already 1 up to periodization truncation.
    """
    t = grid.points
    if kind == "gaussian":
        return Signal(grid, _gaussian_values(t))
    if kind == "indicator":
        vals = ((t >= 0.0) & (t < 1.0)).astype(np.complex128)
        return Signal(grid, vals)
    if kind == "hermite":
        m = 0 if param is None else int(param)
        if m < 0:
            raise ParameterError(f"hermite index must be >= 0, got {m}")
        return Signal(grid, _hermite_values(t, m))
    if kind == "bspline":
        order = 2 if param is None else int(param)
        if order < 1:
            raise ParameterError(f"bspline order must be >= 1, got {order}")
        box = ((t >= 0.0) & (t < 1.0)).astype(np.complex128)
        vals = box
        spec_box = np.fft.fft(box)
        spec = spec_box.copy()
        for _ in range(order - 1):
            spec = spec * spec_box / grid.s
        vals = np.fft.ifft(spec)
        nrm = math.sqrt(float(np.sum(np.abs(vals) ** 2)) / grid.s)
        return Signal(grid, vals / nrm)
    raise ParameterError(f"unsupported window kind {kind!r}; expected one of {WINDOW_KINDS}")


def inner(f: Signal, g: Signal) -> complex:
    """Quadrature inner product, linear in ``f``: (1/s) sum f * conj(g)."""
    _require_same_grid(f, g)
    return complex(np.vdot(g.values, f.values) / f.grid.s)


def l2_norm_sq(f: Signal) -> float:
    return float(np.sum(np.abs(f.values) ** 2)) / f.grid.s


def l2_norm(f: Signal) -> float:
    return math.sqrt(l2_norm_sq(f))


def _require_same_grid(f: Signal, g: Signal) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


def modulation_values(grid: GridSpec, freq_bins: int) -> np.ndarray:
    """Samples of exp(2 pi i nu t) for the grid frequency nu = freq_bins / P.

    Exactly periodic for every integer bin count; the half-period offset of
    the grid contributes the global sign (-1)^freq_bins.
    """
    w = int(freq_bins)
    n = grid.n
    phase = np.exp(2j * np.pi * ((w * np.arange(n)) % n) / n)
    if w % 2:
        phase = -phase
    return phase


def phase_space_shift(f: Signal, time_samples: int, freq_bins: int) -> Signal:
    """Apply exp(2 pi i nu t) f(t - x) for x = time_samples/s, nu = freq_bins/P."""
    shifted = np.roll(f.values, int(time_samples))
    return Signal(f.grid, shifted * modulation_values(f.grid, freq_bins))


def tf_shift(f: Signal, k: int, l: int, lat: LatticeSpec) -> Signal:
    """Lattice time-frequency shift pi(theta*k, l): modulate by l after shifting by theta*k."""
    if lat.grid != f.grid:
        raise GridMismatchError(f"lattice grid {lat.grid} differs from signal grid {f.grid}")
    return phase_space_shift(f, int(k) * lat.time_step, int(l) * f.grid.P)


def nabla1(f: Signal, theta: Fraction | float | int) -> Signal:
    """Covariant position derivative: multiply pointwise by (2 pi i / theta) t."""
    th = float(theta)
    if th <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    return Signal(f.grid, (2j * np.pi / th) * f.grid.points * f.values)


def derivative_multiplier(grid: GridSpec) -> np.ndarray:
    """Centered spectral-derivative multiplier 2 pi i nu, Nyquist mode zeroed."""
    freqs = np.fft.fftfreq(grid.n, d=1.0 / grid.s)
    mult = 2j * np.pi * freqs
    if grid.n % 2 == 0:
        mult[grid.n // 2] = 0.0
    return mult


def nabla2(f: Signal) -> Signal:
    """Covariant momentum derivative: spectral differentiation on the periodic grid."""
    spec = np.fft.fft(f.values)
    return Signal(f.grid, np.fft.ifft(derivative_multiplier(f.grid) * spec))


def uncertainty_product(g: Signal, theta: Fraction | float | int) -> float:
    """Localization product ||nabla1 g||^2 * ||nabla2 g||^2."""
    return l2_norm_sq(nabla1(g, theta)) * l2_norm_sq(nabla2(g))


def signal_rows(f: Signal) -> list[tuple[int, float, float, float]]:
    """(index, t, re, im) rows for serialization."""
    t = f.grid.points
    return [
        (j, float(t[j]), float(f.values[j].real), float(f.values[j].imag))
        for j in range(f.grid.n)
    ]
