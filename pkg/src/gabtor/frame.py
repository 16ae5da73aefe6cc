"""Gabor analysis/synthesis, the frame operator, frame bounds and dual windows.

The Gabor system of a window g over the lattice theta*Z x Z consists of
the shifts pi(theta*k, l)g for k in [0, K) and l in [0, s), where
K = n/(theta*s) time shifts tile one period.  The frame operator

    S f = sum_{k,l} <f, pi(theta k, l) g> pi(theta k, l) g

is Hermitian positive semidefinite and commutes with every lattice shift.

``frame_operator_apply`` never assembles S.  The default method loops over
the time-shift lattice points with the inner frequency sum collapsed in
closed form (summing the s modulations of a fixed time shift against the
coefficients reduces exactly to a period-s folding); the ``lattice``
method is the literal double loop over all lattice points.  Both are
sequential with a fixed reduction order and agree to ~1e-15; the dense
matrix is assembled only for small-n eigensolves and oracle checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    GridMismatchError,
    NotAFrameError,
    NotTightError,
    ParameterError,
)
from .signal import LatticeSpec, Signal

DEFAULT_CG_TOL = 1e-10
DEFAULT_MAX_ITER = 5000
DEFAULT_POSITIVITY = 1e-6
DENSE_CUTOFF = 2048
MAX_LANCZOS_STEPS = 400
_POWER_SEED = 20240

APPLY_METHODS = ("fold", "lattice")


@dataclass(frozen=True)
class CoefficientArray:
    """Analysis coefficients c[k, l] over the fundamental block [0,K) x [0,s)."""

    lat: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        K = self.lat.time_shift_count()
        s = self.lat.frequency_shift_count
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (K, s):
            raise ParameterError(f"coefficient block must have shape {(K, s)}, got {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def sq_sum(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class FrameBounds:
    """Extreme eigenvalues of the frame operator plus solver provenance."""

    lower: float
    upper: float
    method: str = "dense"
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper + 1e-12):
            raise ParameterError(f"bounds must satisfy 0 <= A <= B, got {self.lower}, {self.upper}")


def _check_pair(f: Signal, g: Signal, lat: LatticeSpec) -> None:
    if f.grid != g.grid or f.grid != lat.grid:
        raise GridMismatchError("signal and lattice grids must all agree")


def _shifted_windows(g: Signal, lat: LatticeSpec) -> np.ndarray:
    """Stack of the K time-shifted windows, row k = g shifted by theta*k."""
    K = lat.time_shift_count()
    a = lat.time_step
    out = np.empty((K, g.grid.n), dtype=np.complex128)
    for k in range(K):
        out[k] = np.roll(g.values, k * a)
    return out


def _freq_bin_signs(lat: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """DFT bins l*P for l in [0, s) and the offset signs (-1)^(l*P)."""
    s = lat.frequency_shift_count
    P = lat.grid.P
    ls = np.arange(s)
    bins = (ls * P) % lat.grid.n
    signs = np.where((ls * P) % 2 == 0, 1.0, -1.0)
    return bins, signs


def analysis(f: Signal, g: Signal, lat: LatticeSpec) -> CoefficientArray:
    """Coefficients c[k, l] = <f, pi(theta k, l) g> over the fundamental block.

    For fixed k the l-row is a DFT of f * conj(shifted g) read at bins l*P,
    which equals the direct inner products exactly.
    """
    _check_pair(f, g, lat)
    shifted = _shifted_windows(g, lat)
    bins, signs = _freq_bin_signs(lat)
    K = shifted.shape[0]
    out = np.empty((K, lat.frequency_shift_count), dtype=np.complex128)
    for k in range(K):
        u = f.values * np.conj(shifted[k])
        spec = np.fft.fft(u)
        out[k] = signs * spec[bins] / lat.grid.s
    return CoefficientArray(lat, out)


def synthesis(c: CoefficientArray, g: Signal) -> Signal:
    """Superposition sum_{k,l} c[k, l] pi(theta k, l) g."""
    lat = c.lat
    if g.grid != lat.grid:
        raise GridMismatchError("window grid differs from coefficient lattice grid")
    shifted = _shifted_windows(g, lat)
    bins, signs = _freq_bin_signs(lat)
    n = lat.grid.n
    acc = np.zeros(n, dtype=np.complex128)
    for k in range(shifted.shape[0]):
        spec = np.zeros(n, dtype=np.complex128)
        spec[bins] = signs * c.values[k]
        acc += shifted[k] * (np.fft.ifft(spec) * n)
    return Signal(lat.grid, acc)


class FrameOperator:
    """Matrix-free frame operator of a fixed window over a fixed lattice.

    Precomputes the shifted windows once so repeated applies inside
    iterative solvers stay cheap.
    """

    def __init__(self, g: Signal, lat: LatticeSpec):
        _check_pair(g, g, lat)
        self.g = g
        self.lat = lat
        self.n = lat.grid.n
        self._shifted = _shifted_windows(g, lat)
        P, s = lat.grid.P, lat.frequency_shift_count
        self._stack = self._shifted.reshape(-1, P, s)
        self._stack_conj = np.conj(self._stack)

    def apply_values(self, v: np.ndarray) -> np.ndarray:
        """Fold method: for each time shift, the frequency sum reduces
        exactly to a period-s folding of v * conj(shifted window)."""
        P = self.lat.grid.P
        s = self.lat.frequency_shift_count
        v2 = v.reshape(P, s)
        folded = np.einsum("kps,ps->ks", self._stack_conj, v2)
        out = np.einsum("kps,ks->ps", self._stack, folded)
        return out.reshape(self.n)

    def apply_values_lattice(self, v: np.ndarray) -> np.ndarray:
        """Reference method: literal sum over all lattice points."""
        lat = self.lat
        s = lat.grid.s
        from .signal import modulation_values

        mods = [modulation_values(lat.grid, l * lat.grid.P) for l in range(lat.frequency_shift_count)]
        out = np.zeros(self.n, dtype=np.complex128)
        for row in self._shifted:
            for mod in mods:
                atom = row * mod
                coeff = np.vdot(atom, v) / s
                out += coeff * atom
        return out

    def apply(self, f: Signal, method: str = "fold") -> Signal:
        if method == "fold":
            return Signal(self.lat.grid, self.apply_values(f.values))
        if method == "lattice":
            return Signal(self.lat.grid, self.apply_values_lattice(f.values))
        raise ParameterError(f"unknown apply method {method!r}; expected one of {APPLY_METHODS}")

    def dense_matrix(self) -> np.ndarray:
        """Assemble S = (1/s) G G^H from the Gabor system matrix (small n only)."""
        G = gabor_matrix(self.g, self.lat)
        return (G @ G.conj().T) / self.lat.grid.s


def frame_operator_apply(f: Signal, g: Signal, lat: LatticeSpec, method: str = "fold") -> Signal:
    """Apply the frame operator of window g to f."""
    _check_pair(f, g, lat)
    return FrameOperator(g, lat).apply(f, method=method)


def gabor_matrix(g: Signal, lat: LatticeSpec) -> np.ndarray:
    """Dense n x (K*s) matrix whose columns are pi(theta k, l) g, k-major order."""
    _check_pair(g, g, lat)
    shifted = _shifted_windows(g, lat)
    from .signal import modulation_values

    s = lat.frequency_shift_count
    n = lat.grid.n
    K = shifted.shape[0]
    mods = np.stack([modulation_values(lat.grid, l * lat.grid.P) for l in range(s)])
    G = np.empty((n, K * s), dtype=np.complex128)
    for k in range(K):
        G[:, k * s:(k + 1) * s] = (mods * shifted[k]).T
    return G


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _lanczos_extremes(
    apply_fn,
    n: int,
    tol: float,
    max_steps: int,
) -> tuple[float, float, int, float]:
    """Extreme eigenvalues of a Hermitian PSD operator by the Lanczos process.

    Full reorthogonalization keeps the basis clean; the smooth-window frame
    operators here have nearly flat spectra at both edges, where plain power
    or shifted iteration needs thousands of applies for a handful of digits
    while a short Krylov run resolves both extremes at once.  Returns
    (smallest, largest, steps, residual bound of the extreme Ritz pairs).
    """
    steps = min(max_steps, n)
    Q = np.empty((steps + 1, n), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []
    Q[0] = _start_vector(n)
    lo_prev, hi_prev = np.inf, -np.inf
    m = 0
    for j in range(steps):
        w = apply_fn(Q[j])
        alpha = float(np.vdot(Q[j], w).real)
        alphas.append(alpha)
        w = w - alpha * Q[j]
        if j > 0:
            w = w - betas[-1] * Q[j - 1]
        # one extra full sweep keeps loss of orthogonality at bay
        w = w - Q[: j + 1].T @ (Q[: j + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        m = j + 1
        if beta <= 1e-14 * max(abs(alpha), 1.0):
            betas.append(0.0)
            break
        betas.append(beta)
        Q[j + 1] = w / beta
        if m % 10 == 0 or m == steps:
            T = np.diag(alphas) + np.diag(betas[:-1], 1) + np.diag(betas[:-1], -1)
            evals = np.linalg.eigvalsh(T)
            lo, hi = float(evals[0]), float(evals[-1])
            scale = max(abs(hi), 1e-300)
            if abs(lo - lo_prev) <= tol * scale and abs(hi - hi_prev) <= tol * scale:
                break
            lo_prev, hi_prev = lo, hi
    T = np.diag(alphas[:m]) + np.diag(betas[: m - 1], 1) + np.diag(betas[: m - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    beta_last = betas[m - 1] if m <= len(betas) else 0.0
    res = beta_last * float(max(abs(evecs[-1, 0]), abs(evecs[-1, -1])))
    return float(evals[0]), float(evals[-1]), m, res


def frame_bounds(
    g: Signal,
    lat: LatticeSpec,
    method: str = "auto",
    tol: float = 1e-9,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FrameBounds:
    """Extreme eigenvalues of the frame operator.

    ``dense`` assembles S and calls the Hermitian eigensolver (authoritative
    for n <= DENSE_CUTOFF); ``iterative`` runs power iteration for the upper
    bound and shifted power iteration for the lower one.  ``auto`` picks
    dense when the grid is small enough.
    """
    _check_pair(g, g, lat)
    n = lat.grid.n
    if method == "auto":
        method = "dense" if n <= DENSE_CUTOFF else "iterative"
    if method == "dense":
        op = FrameOperator(g, lat)
        evals = np.linalg.eigvalsh(op.dense_matrix())
        return FrameBounds(max(float(evals[0]), 0.0), float(evals[-1]), method="dense")
    if method != "iterative":
        raise ParameterError(f"unknown frame_bounds method {method!r}")
    op = FrameOperator(g, lat)
    if np.all(g.values == 0):
        return FrameBounds(0.0, 0.0, method="iterative")
    lo, hi, steps, res = _lanczos_extremes(op.apply_values, n, tol, min(max_iter, MAX_LANCZOS_STEPS))
    return FrameBounds(max(lo, 0.0), max(hi, 0.0), method="iterative", iterations=steps, residual=res)


def _cg_solve(apply_fn, b: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, float]:
    """Conjugate gradients for a Hermitian positive definite operator."""
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    for it in range(1, max_iter + 1):
        Ap = apply_fn(p)
        denom = float(np.vdot(p, Ap).real)
        if denom <= 0.0:
            raise ConvergenceError(
                "frame operator lost positive definiteness during CG",
                last_iterate=x,
                residual=np.sqrt(rs) / bnorm,
            )
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = float(np.vdot(r, r).real)
        if np.sqrt(rs_new) <= tol * bnorm:
            return x, it, float(np.sqrt(rs_new) / bnorm)
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise ConvergenceError(
        f"CG did not reach tolerance {tol} in {max_iter} iterations",
        last_iterate=x,
        residual=float(np.sqrt(rs) / bnorm),
    )


def _require_frame(
    g: Signal,
    lat: LatticeSpec,
    positivity_threshold: float,
    bounds: FrameBounds | None = None,
) -> FrameBounds:
    if bounds is None:
        bounds = frame_bounds(g, lat)
    if bounds.upper <= 0 or bounds.lower < positivity_threshold * bounds.upper:
        raise NotAFrameError(
            f"lower frame bound {bounds.lower:.3e} below threshold "
            f"{positivity_threshold:.1e} * B = {positivity_threshold * bounds.upper:.3e}",
            bounds.lower,
            bounds.upper,
        )
    return bounds


def dual_window(
    g: Signal,
    lat: LatticeSpec,
    cg_tol: float = DEFAULT_CG_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    positivity_threshold: float = DEFAULT_POSITIVITY,
    bounds: FrameBounds | None = None,
) -> Signal:
    """Canonical dual window h = S^{-1} g via matrix-free conjugate gradients."""
    _check_pair(g, g, lat)
    _require_frame(g, lat, positivity_threshold, bounds)
    op = FrameOperator(g, lat)
    h, _, _ = _cg_solve(op.apply_values, np.asarray(g.values), cg_tol, max_iter)
    return Signal(lat.grid, h)


def _newton_schulz_invsqrt(S: np.ndarray, upper: float, tol: float = 1e-14, max_iter: int = 200) -> np.ndarray:
    """Coupled Newton-Schulz iteration for the inverse square root of a
    Hermitian positive definite matrix, touching S only through products."""
    c = 1.01 * upper
    n = S.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    Y = S / c
    Z = eye.copy()
    for _ in range(max_iter):
        T = 1.5 * eye - 0.5 * (Z @ Y)
        Y = Y @ T
        Z = T @ Z
        err = np.linalg.norm(Z @ Y - eye, ord="fro") / np.sqrt(n)
        if err <= tol:
            break
    else:
        raise ConvergenceError("Newton-Schulz inverse square root did not converge", residual=err)
    return Z / np.sqrt(c)


def tight_window(
    g: Signal,
    lat: LatticeSpec,
    method: str = "auto",
    positivity_threshold: float = DEFAULT_POSITIVITY,
    bounds: FrameBounds | None = None,
) -> Signal:
    """Canonical tight window S^{-1/2} g; its own frame bounds equal 1.

    ``eigh`` diagonalizes the assembled operator (authoritative at small n);
    ``newton-schulz`` runs the product-only inverse-square-root iteration on
    the same operator and must match eigh to ~1e-8 wherever both run.
    """
    _check_pair(g, g, lat)
    bounds = _require_frame(g, lat, positivity_threshold, bounds)
    if method == "auto":
        method = "eigh" if lat.grid.n <= DENSE_CUTOFF else "newton-schulz"
    op = FrameOperator(g, lat)
    S = op.dense_matrix()
    if method == "eigh":
        evals, evecs = np.linalg.eigh(S)
        evals = np.maximum(evals, bounds.lower * 1e-3 + 1e-300)
        coeff = evecs.conj().T @ g.values
        vals = evecs @ (coeff / np.sqrt(evals))
        return Signal(lat.grid, vals)
    if method == "newton-schulz":
        Z = _newton_schulz_invsqrt(S, bounds.upper)
        return Signal(lat.grid, Z @ g.values)
    raise ParameterError(f"unknown tight_window method {method!r}")


def wexler_raz_check(g: Signal, h: Signal, lat: LatticeSpec) -> float:
    """Biorthogonality defect of (g, h) on the adjoint lattice Z x (1/theta) Z.

    Returns max over the adjoint fundamental block of
    |theta^{-1} <h, pi(m, n/theta) g> - delta_{m0} delta_{n0}|.
    Duality of the pair is equivalent to this defect vanishing.  The inner
    products against all adjoint frequencies of one time shift are read off
    a single DFT, exactly as in :func:`analysis`.
    """
    _check_pair(g, h, lat)
    p, q = lat.theta.numerator, lat.theta.denominator
    P, s = lat.grid.P, lat.grid.s
    a = lat.time_step  # adjoint frequency shifts per period
    if (q * P) % p != 0:
        raise ParameterError(
            f"adjoint lattice frequency 1/theta = {q}/{p} is not a grid frequency: "
            f"the numerator of theta must divide P"
        )
    inv_theta = q / p
    bins = (np.arange(a) * (q * P // p)) % lat.grid.n
    signs = np.where((np.arange(a) * (q * P // p)) % 2 == 0, 1.0, -1.0)
    defect = 0.0
    for m in range(P):
        u = h.values * np.conj(np.roll(g.values, m * s))
        spec = np.fft.fft(u)
        vals = inv_theta * signs * spec[bins] / s
        if m == 0:
            vals = vals - np.concatenate(([1.0], np.zeros(a - 1)))
        defect = max(defect, float(np.max(np.abs(vals))))
    return defect
