"""Constant-curvature connection checks and critical-density diagnostics.

The pair (nabla1, nabla2) is a connection on the signal module: it obeys
the left Leibniz rule against the algebra derivations, is compatible with
the algebra-valued inner product, and has constant curvature

    [nabla1, nabla2] = -(2 pi i / theta) I.

All identities here are reported as normalized residuals.  They hold to
near machine precision for smooth, well-localized windows; for windows
with jumps the derivative-side quantities blow up under grid refinement,
which is exactly the localization obstruction at critical density, so the
sweep and refinement studies report growth rather than asserting bounds.

Exchange identities: for a biorthogonal pair (g, h) on the adjoint
lattice, expanding nabla_i across a shift and using biorthogonality gives

    <nabla_i g, pi(m, n/theta) h>
        = -exp(-2 pi i m n / theta) <pi(-m, -n/theta) g, nabla_i h>.

The derivatives are skew-adjoint, hence the leading sign; at theta = 1 the
phase factor is exactly 1.  ``battle_identity_check`` returns the two
sides of this equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isfinite

import numpy as np

from .algebra import AlgebraElement, act, delta_element, derivation, module_ip, unit_phase
from .errors import NotBiorthogonalError, ParameterError
from .frame import dual_window, frame_bounds, frame_operator_apply, wexler_raz_check
from .signal import (
    GridSpec,
    LatticeSpec,
    Signal,
    inner,
    l2_norm,
    l2_norm_sq,
    make_window,
    nabla1,
    nabla2,
    phase_space_shift,
    uncertainty_product,
)

BIORTHOGONALITY_TOL = 1e-8
GROWTH_FLAG_FACTOR = 1.5


def _nabla(f: Signal, i: int, theta) -> Signal:
    if i == 1:
        return nabla1(f, theta)
    if i == 2:
        return nabla2(f)
    raise ParameterError(f"direction must be 1 or 2, got {i}")


def leibniz_residual(a: AlgebraElement, g: Signal, lat: LatticeSpec, i: int) -> float:
    """|| nabla_i(a.g) - (d_i a).g - a.(nabla_i g) || / ||g||."""
    ng = l2_norm(g)
    if ng == 0.0:
        return 0.0
    lhs = _nabla(act(a, g, lat), i, lat.theta)
    rhs = act(derivation(a, i), g, lat).values + act(a, _nabla(g, i, lat.theta), lat).values
    return float(np.linalg.norm(lhs.values - rhs) / np.sqrt(lat.grid.s)) / ng


def hermitian_residual(f: Signal, g: Signal, lat: LatticeSpec, i: int, R: int) -> float:
    """l1 coefficient defect of d_i<f,g> = <nabla_i f, g> + <f, nabla_i g> over |k|,|l| <= R."""
    nf, ng = l2_norm(f), l2_norm(g)
    if nf == 0.0 or ng == 0.0:
        return 0.0
    lhs = derivation(module_ip(f, g, lat, R), i)
    rhs = module_ip(_nabla(f, i, lat.theta), g, lat, R) + module_ip(f, _nabla(g, i, lat.theta), lat, R)
    return (lhs - rhs).l1_norm / (nf * ng)


def curvature_residual(g: Signal, theta: Fraction | float | int) -> float:
    """|| (nabla1 nabla2 - nabla2 nabla1) g + (2 pi i / theta) g || / ||g||."""
    ng = l2_norm(g)
    if ng == 0.0:
        return 0.0
    comm = nabla1(nabla2(g), theta).values - nabla2(nabla1(g, theta)).values
    defect = comm + (2j * np.pi / float(theta)) * g.values
    return float(np.linalg.norm(defect) / np.sqrt(g.grid.s)) / ng


def curvature_constant(g: Signal, theta: Fraction | float | int) -> complex:
    """Rayleigh fit <[nabla1, nabla2] g, g> / ||g||^2; equals -2 pi i / theta."""
    comm = Signal(g.grid, nabla1(nabla2(g), theta).values - nabla2(nabla1(g, theta)).values)
    return inner(comm, g) / l2_norm_sq(g)


def battle_identity_check(
    g: Signal,
    h: Signal,
    lat: LatticeSpec,
    k: int,
    l: int,
    mode: int = 1,
    biorthogonality_tol: float = BIORTHOGONALITY_TOL,
) -> tuple[complex, complex]:
    """Two sides of the exchange identity at the adjoint-lattice point (k, l).

    Returns (<nabla_i g, pi(k, l/theta) h>,
             -exp(-2 pi i k l / theta) <pi(-k, -l/theta) g, nabla_i h>)
    for i = ``mode``.  The pair must first pass the biorthogonality
    certificate; equality of the returned values then holds whenever the
    relevant derivative norms are stable on the grid.
    """
    defect = wexler_raz_check(g, h, lat)
    if not (defect <= biorthogonality_tol):
        raise NotBiorthogonalError(
            f"pair is not biorthogonal: Wexler-Raz defect {defect:.3e} "
            f"exceeds {biorthogonality_tol:.1e}",
            defect,
        )
    p, q = lat.theta.numerator, lat.theta.denominator
    P, s = lat.grid.P, lat.grid.s
    if (q * P) % p != 0:
        raise ParameterError("adjoint lattice frequency 1/theta not realizable on this grid")
    freq_bins = int(l) * q * P // p
    ng = _nabla(g, mode, lat.theta)
    nh = _nabla(h, mode, lat.theta)
    lhs = inner(ng, phase_space_shift(h, int(k) * s, freq_bins))
    # exp(-2 pi i k l / theta) with 1/theta = q/p, via the exact phase table
    phase = unit_phase(Fraction(q, p), int(k) * int(l))
    rhs = -phase * inner(phase_space_shift(g, -int(k) * s, -freq_bins), nh)
    return lhs, rhs


@dataclass(frozen=True)
class DiagnosticsRow:
    key: float
    lower: float = float("nan")
    upper: float = float("nan")
    u_g: float = float("nan")
    u_h: float = float("nan")
    u_prod: float = float("nan")
    residuals: dict[str, float] = field(default_factory=dict)
    status: str = "ok"


@dataclass(frozen=True)
class DiagnosticsTable:
    """Rows of a parameter sweep, ordered by key, plus a summary block."""

    key_name: str
    rows: tuple[DiagnosticsRow, ...]
    summary: dict[str, object] = field(default_factory=dict)

    def residual_names(self) -> list[str]:
        names: list[str] = []
        for row in self.rows:
            for name in row.residuals:
                if name not in names:
                    names.append(name)
        return names


def _strictly_increasing(xs: list[float]) -> bool:
    return all(b > a for a, b in zip(xs, xs[1:]))


def blt_sweep(
    window_kind: str,
    theta_list: list[Fraction],
    grid: GridSpec,
    window_param: int | None = None,
    cg_tol: float = 1e-10,
    max_iter: int = 5000,
    positivity_threshold: float = 1e-6,
    bounds_method: str = "auto",
) -> DiagnosticsTable:
    """Localization products of window and canonical dual across densities.

    Each row reports the frame bounds, U(g), U(h) and their product at one
    theta; rows where the system fails to be a frame are flagged and the
    sweep continues.  The summary records whether U(h) increases toward the
    critical density theta = 1 and the ratio between the last and first
    finite values.
    """
    if not theta_list:
        raise ParameterError("theta_list must not be empty")
    g = make_window(window_kind, grid, window_param)
    rows = []
    for theta in sorted(Fraction(t) for t in theta_list):
        key = float(theta)
        try:
            lat = LatticeSpec(theta, grid)
            lat.time_shift_count()
        except ParameterError as exc:
            rows.append(DiagnosticsRow(key=key, status=f"error:{exc}"))
            continue
        bounds = frame_bounds(g, lat, method=bounds_method)
        u_g = uncertainty_product(g, theta)
        if bounds.upper <= 0 or bounds.lower < positivity_threshold * bounds.upper:
            rows.append(
                DiagnosticsRow(
                    key=key,
                    lower=bounds.lower,
                    upper=bounds.upper,
                    u_g=u_g,
                    residuals={"cg": float("nan"), "wexler_raz": float("nan")},
                    status="not-a-frame",
                )
            )
            continue
        h = dual_window(
            g, lat, cg_tol=cg_tol, max_iter=max_iter,
            positivity_threshold=positivity_threshold, bounds=bounds,
        )
        u_h = uncertainty_product(h, theta)
        wr = wexler_raz_check(g, h, lat)
        solve_res = l2_norm(
            Signal(grid, frame_operator_apply(h, g, lat).values - g.values)
        ) / l2_norm(g)
        rows.append(
            DiagnosticsRow(
                key=key,
                lower=bounds.lower,
                upper=bounds.upper,
                u_g=u_g,
                u_h=u_h,
                u_prod=u_g * u_h,
                residuals={"cg": solve_res, "wexler_raz": wr},
                status="ok",
            )
        )
    finite_uh = [r.u_h for r in rows if r.status == "ok" and isfinite(r.u_h)]
    summary: dict[str, object] = {
        "u_h_strictly_increasing": _strictly_increasing(finite_uh) if len(finite_uh) >= 2 else False,
        "u_h_last_over_first": (finite_uh[-1] / finite_uh[0]) if len(finite_uh) >= 2 else float("nan"),
        "flagged_rows": sum(1 for r in rows if r.status != "ok"),
    }
    return DiagnosticsTable(key_name="theta", rows=tuple(rows), summary=summary)


def grid_divergence_study(
    window_kind: str,
    s_list: list[int],
    P: int,
    theta: Fraction | float | int = 1,
) -> DiagnosticsTable:
    """Derivative energies of the indicator window under grid refinement.

    Rows are keyed by s and carry the momentum-derivative energy of the
    subject window with its doubling ratio, the position-derivative energy,
    and the same energies for a gaussian control.  The jump window's
    momentum energy grows linearly with bandwidth; the gaussian control is
    refinement-stable.
    """
    if window_kind != "indicator":
        raise ParameterError("the refinement study is defined for the indicator window")
    if sorted(s_list) != list(s_list) or len(set(s_list)) != len(s_list):
        raise ParameterError("s_list must be strictly increasing")
    rows = []
    prev_d2 = None
    for s in s_list:
        grid = GridSpec(int(s), int(P))
        chi = make_window("indicator", grid)
        gauss = make_window("gaussian", grid)
        d2 = l2_norm_sq(nabla2(chi))
        d1 = l2_norm_sq(nabla1(chi, theta))
        ratio = float("nan") if prev_d2 is None else d2 / prev_d2
        rows.append(
            DiagnosticsRow(
                key=float(s),
                residuals={
                    "d2_energy": d2,
                    "d2_growth": ratio,
                    "d1_energy": d1,
                    "ctrl_d2_energy": l2_norm_sq(nabla2(gauss)),
                    "ctrl_d1_energy": l2_norm_sq(nabla1(gauss, theta)),
                },
            )
        )
        prev_d2 = d2
    ratios = [r.residuals["d2_growth"] for r in rows[1:]]
    summary = {"d2_growth_ratios": ratios}
    return DiagnosticsTable(key_name="s", rows=tuple(rows), summary=summary)


def battle_refinement(
    window_kind: str,
    s_list: list[int],
    P: int,
    theta: Fraction,
    k: int,
    l: int,
    mode: int,
    window_param: int | None = None,
) -> DiagnosticsTable:
    """Exchange-identity pair for a window and its canonical dual across refinements.

    Tracks both sides of the identity, their defect, and the squared
    derivative norms entering it.  The summary flags non-convergence when
    any monitored series grows monotonically by more than
    ``GROWTH_FLAG_FACTOR`` overall, which for jump windows in the
    derivative direction witnesses the critical-density obstruction.
    """
    rows = []
    series: dict[str, list[float]] = {"defect": [], "value": [], "nabla_g": [], "nabla_h": []}
    for s in s_list:
        grid = GridSpec(int(s), int(P))
        g = make_window(window_kind, grid, window_param)
        lat = LatticeSpec(Fraction(theta), grid)
        h = dual_window(g, lat)
        v1, v2 = battle_identity_check(g, h, lat, k, l, mode=mode)
        ng = l2_norm_sq(_nabla(g, mode, lat.theta))
        nh = l2_norm_sq(_nabla(h, mode, lat.theta))
        defect = abs(v1 - v2)
        value = max(abs(v1), abs(v2))
        series["defect"].append(defect)
        series["value"].append(value)
        series["nabla_g"].append(ng)
        series["nabla_h"].append(nh)
        rows.append(
            DiagnosticsRow(
                key=float(s),
                residuals={
                    "lhs_abs": abs(v1),
                    "rhs_abs": abs(v2),
                    "defect": defect,
                    "nabla_g_sq": ng,
                    "nabla_h_sq": nh,
                },
            )
        )
    flagged = {}
    for name, xs in series.items():
        finite = [x for x in xs if isfinite(x)]
        growing = (
            len(finite) == len(xs)
            and len(xs) >= 2
            and _strictly_increasing(xs)
            and xs[0] > 0
            and xs[-1] / xs[0] > GROWTH_FLAG_FACTOR
        )
        flagged[name] = growing
    summary = {
        "non_convergent": any(flagged.values()),
        "growing_series": sorted(name for name, v in flagged.items() if v),
    }
    return DiagnosticsTable(key_name="s", rows=tuple(rows), summary=summary)
