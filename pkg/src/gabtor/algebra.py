"""Twisted group algebra of coefficient arrays over the lattice Z^2.

An element a = (a[k, l]) on a finite support box acts on signals through

    rep(a) = sum_{k,l} a[k, l] pi(theta k, l),

and composition of time-frequency shifts forces the twisted product

    (a * b)[u, v] = sum_{k,l} a[k, l] b[u-k, v-l] exp(-2 pi i theta k (v-l)).

Every phase in this module comes from :func:`unit_phase`, which evaluates
exp(-2 pi i theta m) for rational theta = p/q through a q-th root-of-unity
table.  This keeps phases exactly periodic: at theta = 1 every phase is
exactly 1.0 and the product degenerates to a plain convolution, which is
accumulated with exactly rounded sums so that commutativity at theta = 1
holds to the bit.

The star structure and the trace are forced by the representation:
pi(theta k, l)^* = exp(-2 pi i theta k l) pi(-theta k, -l) gives the
involution, and tau(a) = a[0, 0] is the unique shift-invariant trace
normalized by tau(1) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .errors import NotTightError, ParameterError
from .signal import LatticeSpec, Signal, inner, l2_norm, phase_space_shift


@lru_cache(maxsize=64)
def _root_table(q: int) -> np.ndarray:
    roots = np.exp(-2j * np.pi * np.arange(q) / q)
    roots.setflags(write=False)
    return roots


def unit_phase(theta: Fraction, exponent: int) -> complex:
    """exp(-2 pi i theta exponent) via an exact root-of-unity table."""
    th = Fraction(theta)
    return complex(_root_table(th.denominator)[(th.numerator * exponent) % th.denominator])


def _phase_vector(theta: Fraction, exponents: np.ndarray) -> np.ndarray:
    th = Fraction(theta)
    return _root_table(th.denominator)[(th.numerator * exponents) % th.denominator]


@dataclass(frozen=True)
class AlgebraElement:
    """Coefficients on the centered box |k| <= rk, |l| <= rl for a fixed theta."""

    theta: Fraction
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta))
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] % 2 == 0 or c.shape[1] % 2 == 0:
            raise ParameterError(f"coefficient box must be odd-sized 2-D, got shape {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def rk(self) -> int:
        return self.coeffs.shape[0] // 2

    @property
    def rl(self) -> int:
        return self.coeffs.shape[1] // 2

    @cached_property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def coeff(self, k: int, l: int) -> complex:
        """a[k, l], zero outside the support box."""
        if abs(k) > self.rk or abs(l) > self.rl:
            return 0.0
        return complex(self.coeffs[k + self.rk, l + self.rl])

    def k_indices(self) -> np.ndarray:
        return np.arange(-self.rk, self.rk + 1)

    def l_indices(self) -> np.ndarray:
        return np.arange(-self.rl, self.rl + 1)

    def padded_to(self, rk: int, rl: int) -> np.ndarray:
        """Coefficients embedded in the centered box of radii (rk, rl)."""
        if rk < self.rk or rl < self.rl:
            raise ParameterError("cannot pad to a smaller box")
        out = np.zeros((2 * rk + 1, 2 * rl + 1), dtype=np.complex128)
        out[rk - self.rk:rk + self.rk + 1, rl - self.rl:rl + self.rl + 1] = self.coeffs
        return out

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _require_same_theta(self, other)
        rk, rl = max(self.rk, other.rk), max(self.rl, other.rl)
        return AlgebraElement(self.theta, self.padded_to(rk, rl) + other.padded_to(rk, rl))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (other * (-1.0))

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        return AlgebraElement(self.theta, self.coeffs * scalar)

    __rmul__ = __mul__


def _require_same_theta(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.theta != b.theta:
        raise ParameterError(f"mixed deformation parameters: {a.theta} vs {b.theta}")


def delta_element(theta: Fraction, k: int = 0, l: int = 0, value: complex = 1.0) -> AlgebraElement:
    """value * delta_{(k,l)} on the smallest centered box containing (k, l)."""
    rk, rl = abs(int(k)), abs(int(l))
    c = np.zeros((2 * rk + 1, 2 * rl + 1), dtype=np.complex128)
    c[k + rk, l + rl] = value
    return AlgebraElement(theta, c)


def zero_element(theta: Fraction) -> AlgebraElement:
    return AlgebraElement(theta, np.zeros((1, 1), dtype=np.complex128))


def _twisted_product_exact(a: AlgebraElement, b: AlgebraElement) -> np.ndarray:
    # theta = 1 path: plain convolution accumulated with exactly rounded sums
    # of individually rounded real products, so only the term multiset (not
    # its order, and not FMA contraction inside a complex multiply) determines
    # each cell; swapping the factors then gives a bitwise identical result.
    rk, rl = a.rk + b.rk, a.rl + b.rl
    out = np.empty((2 * rk + 1, 2 * rl + 1), dtype=np.complex128)
    for ui, u in enumerate(range(-rk, rk + 1)):
        klo, khi = max(-a.rk, u - b.rk), min(a.rk, u + b.rk)
        for vi, v in enumerate(range(-rl, rl + 1)):
            llo, lhi = max(-a.rl, v - b.rl), min(a.rl, v + b.rl)
            if klo > khi or llo > lhi:
                out[ui, vi] = 0.0
                continue
            ablock = a.coeffs[klo + a.rk:khi + a.rk + 1, llo + a.rl:lhi + a.rl + 1]
            bblock = b.coeffs[u - khi + b.rk:u - klo + b.rk + 1, v - lhi + b.rl:v - llo + b.rl + 1][::-1, ::-1]
            ar, ai = ablock.real, ablock.imag
            br, bi = bblock.real, bblock.imag
            re = math.fsum((ar * br).ravel()) - math.fsum((ai * bi).ravel())
            im = math.fsum((ar * bi).ravel()) + math.fsum((ai * br).ravel())
            out[ui, vi] = complex(re, im)
    return out


def twisted_product(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Product forced by operator composition: rep(a * b) = rep(a) rep(b)."""
    _require_same_theta(a, b)
    if a.theta.denominator == 1:
        return AlgebraElement(a.theta, _twisted_product_exact(a, b))
    rk, rl = a.rk + b.rk, a.rl + b.rl
    out = np.zeros((2 * rk + 1, 2 * rl + 1), dtype=np.complex128)
    for ki, k in enumerate(a.k_indices()):
        # the phase exp(-2 pi i theta k l_b) depends on b's own column index
        phased_b = b.coeffs * _phase_vector(a.theta, k * b.l_indices())[None, :]
        for li, l in enumerate(a.l_indices()):
            akl = a.coeffs[ki, li]
            if akl == 0.0:
                continue
            r0, c0 = ki, li  # offset of b's box inside the output box
            out[r0:r0 + 2 * b.rk + 1, c0:c0 + 2 * b.rl + 1] += akl * phased_b
    return AlgebraElement(a.theta, out)


def involution(a: AlgebraElement) -> AlgebraElement:
    """Star operation: (a*)[k, l] = conj(a[-k, -l]) exp(-2 pi i theta k l)."""
    flipped = np.conj(a.coeffs[::-1, ::-1])
    kk = a.k_indices()[:, None]
    ll = a.l_indices()[None, :]
    phases = _phase_vector(a.theta, (kk * ll).ravel()).reshape(flipped.shape)
    return AlgebraElement(a.theta, flipped * phases)


def act(a: AlgebraElement, g: Signal, lat: LatticeSpec) -> Signal:
    """Module action a . g = sum a[k, l] pi(theta k, l) g."""
    if a.theta != lat.theta:
        raise ParameterError(f"element theta {a.theta} differs from lattice theta {lat.theta}")
    if g.grid != lat.grid:
        raise ParameterError("signal grid differs from lattice grid")
    from .signal import modulation_values

    P = lat.grid.P
    mods = {int(l): modulation_values(lat.grid, int(l) * P) for l in a.l_indices()}
    out = np.zeros(lat.grid.n, dtype=np.complex128)
    for ki, k in enumerate(a.k_indices()):
        weights = np.zeros(lat.grid.n, dtype=np.complex128)
        nonzero = False
        for li, l in enumerate(a.l_indices()):
            akl = a.coeffs[ki, li]
            if akl == 0.0:
                continue
            weights += akl * mods[int(l)]
            nonzero = True
        if nonzero:
            out += np.roll(g.values, int(k) * lat.time_step) * weights
    return Signal(lat.grid, out)


def module_ip(f: Signal, g: Signal, lat: LatticeSpec, R: int) -> AlgebraElement:
    """Algebra-valued inner product: coefficients <f, pi(theta k, l) g> for |k|, |l| <= R.

    R must stay below one lattice period in each direction; indices beyond
    half a period are aliased copies of lower ones, which is harmless for
    windows whose coefficients have decayed by then.  The l1 mass of the
    outermost shell (``outer_shell_l1``) serves as the truncation tail
    estimate.
    """
    if f.grid != g.grid or f.grid != lat.grid:
        raise ParameterError("module_ip needs a shared grid")
    R = int(R)
    if R < 0:
        raise ParameterError("truncation radius must be nonnegative")
    s, P, n = lat.grid.s, lat.grid.P, lat.grid.n
    if R >= s or R * lat.time_step >= n:
        raise ParameterError(f"radius {R} reaches beyond one lattice period")
    out = np.empty((2 * R + 1, 2 * R + 1), dtype=np.complex128)
    ls = np.arange(-R, R + 1)
    bins = (ls * P) % n
    signs = np.where((ls * P) % 2 == 0, 1.0, -1.0)
    for ki, k in enumerate(range(-R, R + 1)):
        shifted = np.roll(g.values, k * lat.time_step)
        spec = np.fft.fft(f.values * np.conj(shifted))
        out[ki] = signs * spec[bins] / s
    return AlgebraElement(lat.theta, out)


def outer_shell_l1(a: AlgebraElement) -> float:
    """l1 mass of the outermost shell of the support box (truncation tail estimate)."""
    if a.rk == 0 and a.rl == 0:
        return float(abs(a.coeffs[0, 0]))
    mask = np.zeros(a.coeffs.shape, dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return float(np.sum(np.abs(a.coeffs[mask])))


def derivation(a: AlgebraElement, i: int) -> AlgebraElement:
    """Coefficient multiplier 2 pi i k (i=1) or 2 pi i l (i=2)."""
    if i == 1:
        mult = 2j * np.pi * a.k_indices()[:, None]
    elif i == 2:
        mult = 2j * np.pi * a.l_indices()[None, :]
    else:
        raise ParameterError(f"derivation index must be 1 or 2, got {i}")
    return AlgebraElement(a.theta, a.coeffs * mult)


def trace(a: AlgebraElement) -> complex:
    """Canonical trace tau(a) = a[0, 0]."""
    return complex(a.coeffs[a.rk, a.rl])


def projection_from_tight(
    g: Signal,
    lat: LatticeSpec,
    R: int,
    tightness_tol: float = 1e-6,
    bounds=None,
) -> AlgebraElement:
    """Projection p = <g, g> for a tight window g.

    Requires the measured frame bounds to agree within ``tightness_tol``;
    the coefficients are divided by the common bound so the result is
    idempotent regardless of the tight frame's normalization.
    """
    from .frame import frame_bounds

    if bounds is None:
        bounds = frame_bounds(g, lat)
    if bounds.upper <= 0 or (bounds.upper - bounds.lower) > tightness_tol * max(bounds.upper, 1.0):
        raise NotTightError(
            f"window is not tight: bounds ({bounds.lower:.6e}, {bounds.upper:.6e}) "
            f"differ by more than {tightness_tol:.1e}",
            bounds.lower,
            bounds.upper,
        )
    scale = 2.0 / (bounds.lower + bounds.upper)
    return module_ip(g, g, lat, R) * scale


@dataclass(frozen=True)
class DecayProfile:
    """Weighted sups and l1 data classifying the decay of a coefficient array.

    shell_sups[N] = sup |a[k,l]| (1+|k|+|l|)^N over the whole box;
    outer_sups[N] restricts the sup to the outermost shell.  An element
    looks Schwartz-class when even the highest-order weighted sup has
    died out by the edge of the box, and l1-class when the outermost
    shell carries negligible l1 mass.
    """

    shell_sups: tuple[float, ...]
    outer_sups: tuple[float, ...]
    l1_norm: float
    l1_tail: float
    schwartz_like: bool
    l1_like: bool


def decay_profile(
    a: AlgebraElement,
    N_max: int,
    schwartz_tol: float = 1e-8,
    l1_tol: float = 1e-6,
) -> DecayProfile:
    """Measure polynomial-weighted decay of the coefficients."""
    if N_max < 0:
        raise ParameterError("N_max must be nonnegative")
    weights = 1.0 + np.abs(a.k_indices())[:, None] + np.abs(a.l_indices())[None, :]
    mags = np.abs(a.coeffs)
    outer = np.zeros(a.coeffs.shape, dtype=bool)
    outer[0, :] = outer[-1, :] = True
    outer[:, 0] = outer[:, -1] = True
    shell_sups = []
    outer_sups = []
    for N in range(N_max + 1):
        weighted = mags * weights ** N
        shell_sups.append(float(weighted.max()))
        outer_sups.append(float(weighted[outer].max()))
    tail = outer_shell_l1(a)
    return DecayProfile(
        shell_sups=tuple(shell_sups),
        outer_sups=tuple(outer_sups),
        l1_norm=a.l1_norm,
        l1_tail=tail,
        schwartz_like=all(v < schwartz_tol for v in outer_sups),
        l1_like=tail < l1_tol,
    )


def represent_dense(a: AlgebraElement, lat: LatticeSpec) -> np.ndarray:
    """Dense matrix of rep(a) acting on signal values (small grids only)."""
    if a.theta != lat.theta:
        raise ParameterError("element and lattice theta differ")
    n = lat.grid.n
    out = np.zeros((n, n), dtype=np.complex128)
    basis = np.eye(n)
    for j in range(n):
        e = Signal(lat.grid, basis[j].astype(np.complex128))
        out[:, j] = act(a, e, lat).values
    return out
