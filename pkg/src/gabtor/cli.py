"""Experiment runner.

Every diagnostic is a subcommand reading one config tree (defaults,
optional JSON file, ``--set section.key=value`` overrides) and writing
CSV/JSON and, where a figure makes sense, an SVG plot into the output
directory.  Exit codes: 0 success, 1 usage or degenerate input, 2
not-a-frame / precondition failure, 3 diagnostic ran but exceeded its
tolerances (expected for rough windows).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from . import config as cfgmod
from .algebra import (
    AlgebraElement,
    decay_profile,
    delta_element,
    involution,
    outer_shell_l1,
    projection_from_tight,
    trace,
    twisted_product,
)
from .connection import (
    battle_identity_check,
    battle_refinement,
    blt_sweep,
    curvature_constant,
    curvature_residual,
    grid_divergence_study,
    hermitian_residual,
    leibniz_residual,
)
from .errors import ConvergenceError, GabtorError, ParameterError, PreconditionError
from .frame import dual_window, frame_bounds, tight_window, wexler_raz_check
from .output import (
    table_payload,
    write_algebra_csv,
    write_frame_bounds_csv,
    write_json,
    write_signal_csv,
    write_table_csv,
)
from .signal import LatticeSpec, Signal, l2_norm, make_window

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_DIAGNOSTIC = 3

COMMANDS = (
    "frame-bounds",
    "dual-window",
    "tight-window",
    "ncg-check",
    "blt-sweep",
    "grid-divergence",
    "projection",
    "battle-check",
)


def _out_path(cfg: dict, name: str) -> str:
    return os.path.join(cfg["output"]["directory"], name)


def _wants(cfg: dict, fmt: str) -> bool:
    return fmt in cfg["output"]["formats"]


def _emit_table(cfg: dict, stem: str, table, log_scale: bool | None = None) -> None:
    if _wants(cfg, "csv"):
        write_table_csv(table, _out_path(cfg, f"{stem}.csv"))
    if _wants(cfg, "json"):
        write_json(_out_path(cfg, f"{stem}.json"), table_payload(table))
    if _wants(cfg, "svg"):
        from .plots import plot_table

        scale = cfg["output"]["log_scale"] if log_scale is None else log_scale
        plot_table(table, _out_path(cfg, f"{stem}.svg"), log_scale=scale, title=stem)


def _emit_signal(cfg: dict, stem: str, sig: Signal) -> None:
    if _wants(cfg, "csv"):
        write_signal_csv(sig, _out_path(cfg, f"{stem}.csv"))
    if _wants(cfg, "svg"):
        from .plots import plot_signal

        plot_signal(sig, _out_path(cfg, f"{stem}.svg"), title=stem)


def cmd_frame_bounds(cfg: dict) -> int:
    lat = cfgmod.build_lattice(cfg)
    lat.time_shift_count()
    g = cfgmod.build_window(cfg, lat.grid)
    b = frame_bounds(g, lat, method=cfg["solver"]["bounds_method"])
    if _wants(cfg, "csv"):
        write_frame_bounds_csv(b, _out_path(cfg, "frame_bounds.csv"))
    if _wants(cfg, "json"):
        write_json(
            _out_path(cfg, "frame_bounds.json"),
            {"A": b.lower, "B": b.upper, "method": b.method,
             "iterations": b.iterations, "residual": b.residual},
        )
    threshold = float(cfg["solver"]["positivity_threshold"])
    print(f"frame bounds: A={b.lower!r} B={b.upper!r} ({b.method})")
    if b.upper <= 0 or b.lower < threshold * b.upper:
        print(f"not a frame: A below {threshold!r} * B")
        return EXIT_PRECONDITION
    return EXIT_OK


def cmd_dual_window(cfg: dict) -> int:
    lat = cfgmod.build_lattice(cfg)
    lat.time_shift_count()
    g = cfgmod.build_window(cfg, lat.grid)
    h = dual_window(
        g,
        lat,
        cg_tol=float(cfg["solver"]["cg_tol"]),
        max_iter=int(cfg["solver"]["max_iter"]),
        positivity_threshold=float(cfg["solver"]["positivity_threshold"]),
    )
    defect = wexler_raz_check(g, h, lat)
    _emit_signal(cfg, "dual_window", h)
    if _wants(cfg, "json"):
        write_json(
            _out_path(cfg, "dual_window.json"),
            {"wexler_raz_defect": defect, "norm": l2_norm(h)},
        )
    print(f"dual window written; Wexler-Raz defect = {defect!r}")
    return EXIT_OK


def cmd_tight_window(cfg: dict) -> int:
    lat = cfgmod.build_lattice(cfg)
    lat.time_shift_count()
    g = cfgmod.build_window(cfg, lat.grid)
    gt = tight_window(g, lat, positivity_threshold=float(cfg["solver"]["positivity_threshold"]))
    check = frame_bounds(gt, lat, method=cfg["solver"]["bounds_method"])
    _emit_signal(cfg, "tight_window", gt)
    if _wants(cfg, "json"):
        write_json(
            _out_path(cfg, "tight_window.json"),
            {"A": check.lower, "B": check.upper, "norm": l2_norm(gt)},
        )
    print(f"tight window written; bounds of output = ({check.lower!r}, {check.upper!r})")
    return EXIT_OK


def _ncg_report(g: Signal, lat: LatticeSpec, cfg: dict) -> dict:
    """Leibniz, hermitian-compatibility and curvature residual suites."""
    if l2_norm(g) == 0.0:
        raise ParameterError("window has zero norm; residuals are undefined")
    theta = lat.theta
    R = int(cfg["truncation"]["R"])
    R = min(R, lat.grid.s - 1, lat.grid.n // max(lat.time_step, 1) - 1)
    rng = np.random.default_rng(int(cfg["check"]["seed"]))
    box = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    rnd = AlgebraElement(theta, box)
    residuals = {}
    for i in (1, 2):
        residuals[f"leibniz_shift_{i}"] = leibniz_residual(delta_element(theta, 1, 1), g, lat, i)
        residuals[f"leibniz_random_{i}"] = leibniz_residual(rnd, g, lat, i)
        residuals[f"hermitian_{i}"] = hermitian_residual(g, g, lat, i, R)
    residuals["curvature"] = curvature_residual(g, theta)
    fitted = curvature_constant(g, theta)
    target = -2j * np.pi / float(theta)
    residuals["curvature_constant"] = abs(fitted - target) / abs(target)
    tols = {
        "leibniz": float(cfg["check"]["leibniz_tol"]),
        "hermitian": float(cfg["check"]["hermitian_tol"]),
        "curvature": float(cfg["check"]["curvature_tol"]),
    }
    failures = [
        name
        for name, value in residuals.items()
        if value > tols["leibniz" if name.startswith("leibniz") else
                        "hermitian" if name.startswith("hermitian") else "curvature"]
    ]
    kind = cfg["window"]["kind"]
    rough = kind == "indicator" or (kind == "bspline" and int(cfg["window"]["param"] or 2) == 1)
    return {
        "residuals": residuals,
        "tolerances": tols,
        "failures": failures,
        "passed": not failures,
        "rough_window": rough,
    }


def cmd_ncg_check(cfg: dict) -> int:
    lat = cfgmod.build_lattice(cfg)
    g = cfgmod.build_window(cfg, lat.grid)
    report = _ncg_report(g, lat, cfg)
    if _wants(cfg, "json"):
        write_json(_out_path(cfg, "ncg_check.json"), report)
    for name, value in report["residuals"].items():
        print(f"{name}: {value!r}")
    if report["passed"]:
        print("all connection residuals within tolerance")
        return EXIT_OK
    note = " (rough window: jump discontinuity, divergence expected)" if report["rough_window"] else ""
    print(f"residuals above tolerance: {', '.join(report['failures'])}{note}")
    return EXIT_DIAGNOSTIC


def cmd_blt_sweep(cfg: dict, thetas: str | None = None) -> int:
    names = [t.strip() for t in thetas.split(",")] if thetas else list(cfg["sweep"]["thetas"])
    names = [t for t in names if t]
    if not names:
        print("empty theta list", file=sys.stderr)
        return EXIT_USAGE
    theta_list = [cfgmod.parse_theta(t) for t in names]
    from .signal import GridSpec

    grid = GridSpec(int(cfg["sweep"]["s"]), int(cfg["sweep"]["P"]))
    table = blt_sweep(
        cfg["window"]["kind"],
        theta_list,
        grid,
        window_param=cfg["window"]["param"],
        cg_tol=float(cfg["solver"]["cg_tol"]),
        max_iter=int(cfg["solver"]["max_iter"]),
        positivity_threshold=float(cfg["solver"]["positivity_threshold"]),
        bounds_method=cfg["solver"]["bounds_method"],
    )
    _emit_table(cfg, "blt_sweep", table, log_scale=True)
    print(
        "sweep done: U(h) strictly increasing = "
        f"{table.summary['u_h_strictly_increasing']}, "
        f"last/first = {table.summary['u_h_last_over_first']!r}, "
        f"flagged rows = {table.summary['flagged_rows']}"
    )
    return EXIT_OK


def cmd_grid_divergence(cfg: dict) -> int:
    table = grid_divergence_study(
        "indicator",
        [int(s) for s in cfg["refine"]["s_list"]],
        int(cfg["refine"]["P"]),
        cfgmod.config_theta(cfg),
    )
    _emit_table(cfg, "grid_divergence", table, log_scale=True)
    print(f"refinement ratios of the jump window derivative energy: "
          f"{[repr(r) for r in table.summary['d2_growth_ratios']]}")
    return EXIT_OK


def cmd_projection(cfg: dict, tighten: bool = False) -> int:
    lat = cfgmod.build_lattice(cfg)
    lat.time_shift_count()
    g = cfgmod.build_window(cfg, lat.grid)
    if tighten:
        g = tight_window(g, lat, positivity_threshold=float(cfg["solver"]["positivity_threshold"]))
    R = int(cfg["truncation"]["R"])
    p = projection_from_tight(g, lat, R)
    idem = (twisted_product(p, p) - p).l1_norm
    star = (involution(p) - p).l1_norm
    tail = outer_shell_l1(p)
    prof = decay_profile(p, int(cfg["truncation"]["N_max"]))
    if _wants(cfg, "csv"):
        write_algebra_csv(p, _out_path(cfg, "projection.csv"))
    if _wants(cfg, "json"):
        write_json(
            _out_path(cfg, "projection.json"),
            {
                "trace": trace(p),
                "idempotency_defect_l1": idem,
                "self_adjointness_defect_l1": star,
                "truncation_tail_l1": tail,
                "schwartz_like": prof.schwartz_like,
            },
        )
    if _wants(cfg, "svg"):
        from .plots import plot_algebra

        plot_algebra(p, _out_path(cfg, "projection.svg"), title="projection")
    print(f"projection: trace = {trace(p)!r}, |p*p - p|_1 = {idem!r}, |p* - p|_1 = {star!r}")
    return EXIT_OK


def cmd_battle_check(cfg: dict) -> int:
    lat = cfgmod.build_lattice(cfg)
    lat.time_shift_count()
    g = cfgmod.build_window(cfg, lat.grid)
    h = dual_window(
        g,
        lat,
        cg_tol=float(cfg["solver"]["cg_tol"]),
        max_iter=int(cfg["solver"]["max_iter"]),
        positivity_threshold=float(cfg["solver"]["positivity_threshold"]),
    )
    mode = int(cfg["battle"]["mode"])
    kmax = int(cfg["battle"]["kmax"])
    pairs = []
    worst = 0.0
    for k in range(-kmax, kmax + 1):
        for l in range(-kmax, kmax + 1):
            v1, v2 = battle_identity_check(g, h, lat, k, l, mode=mode)
            worst = max(worst, abs(v1 - v2))
            pairs.append({"k": k, "l": l, "lhs": v1, "rhs": v2, "defect": abs(v1 - v2)})
    refinement = battle_refinement(
        cfg["window"]["kind"],
        [int(s) for s in cfg["refine"]["s_list"]],
        int(cfg["refine"]["P"]),
        lat.theta,
        int(cfg["battle"]["k"]),
        int(cfg["battle"]["l"]),
        mode,
        window_param=cfg["window"]["param"],
    )
    if _wants(cfg, "csv"):
        lines = ["k,l,lhs_re,lhs_im,rhs_re,rhs_im,defect"]
        for row in pairs:
            lines.append(
                f"{row['k']},{row['l']},{row['lhs'].real!r},{row['lhs'].imag!r},"
                f"{row['rhs'].real!r},{row['rhs'].imag!r},{row['defect']!r}"
            )
        from .output import _write

        _write(_out_path(cfg, "battle_check.csv"), "\n".join(lines) + "\n")
        write_table_csv(refinement, _out_path(cfg, "battle_refinement.csv"))
    if _wants(cfg, "json"):
        write_json(
            _out_path(cfg, "battle_check.json"),
            {
                "mode": mode,
                "max_defect": worst,
                "pairs": pairs,
                "refinement": table_payload(refinement),
            },
        )
    if _wants(cfg, "svg"):
        from .plots import plot_table

        plot_table(refinement, _out_path(cfg, "battle_refinement.svg"),
                   log_scale=True, title="battle_refinement")
    flag = refinement.summary["non_convergent"]
    print(f"exchange identity mode {mode}: max defect {worst!r} over |k|,|l| <= {kmax}; "
          f"refinement non-convergent = {flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--theta", help="lattice theta as p/q (overrides lattice.p/q)")
    common.add_argument("--window", help="window kind, optionally kind:param")
    common.add_argument("--show-config", action="store_true",
                        help="print the effective config and exit")
    parser = argparse.ArgumentParser(prog="gabtor", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("frame-bounds", parents=[common])
    sub.add_parser("dual-window", parents=[common])
    sub.add_parser("tight-window", parents=[common])
    sub.add_parser("ncg-check", parents=[common])
    p_sweep = sub.add_parser("blt-sweep", parents=[common])
    p_sweep.add_argument("--thetas", help="comma-separated list of p/q values")
    sub.add_parser("grid-divergence", parents=[common])
    p_proj = sub.add_parser("projection", parents=[common])
    p_proj.add_argument("--tighten", action="store_true",
                        help="replace the window by its canonical tight window first")
    p_battle = sub.add_parser("battle-check", parents=[common])
    p_battle.add_argument("--mode", type=int, choices=(1, 2))
    p_battle.add_argument("--k", type=int)
    p_battle.add_argument("--l", type=int)
    return parser


def _apply_flag_overrides(cfg: dict, args: argparse.Namespace) -> None:
    if args.out:
        cfg["output"]["directory"] = args.out
    if args.theta:
        th = cfgmod.parse_theta(args.theta)
        cfg["lattice"]["p"] = th.numerator
        cfg["lattice"]["q"] = th.denominator
    if args.window:
        kind, _, param = args.window.partition(":")
        cfg["window"]["kind"] = kind
        cfg["window"]["param"] = int(param) if param else None
    if getattr(args, "mode", None) is not None:
        cfg["battle"]["mode"] = args.mode
    if getattr(args, "k", None) is not None:
        cfg["battle"]["k"] = args.k
    if getattr(args, "l", None) is not None:
        cfg["battle"]["l"] = args.l


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config, args.set)
        _apply_flag_overrides(cfg, args)
        cfgmod.validate(cfg)
    except (GabtorError, TypeError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.show_config:
        from .output import jsonable
        import json as _json

        print(_json.dumps(jsonable(cfg), indent=2))
        return EXIT_OK
    try:
        if args.command == "frame-bounds":
            return cmd_frame_bounds(cfg)
        if args.command == "dual-window":
            return cmd_dual_window(cfg)
        if args.command == "tight-window":
            return cmd_tight_window(cfg)
        if args.command == "ncg-check":
            return cmd_ncg_check(cfg)
        if args.command == "blt-sweep":
            return cmd_blt_sweep(cfg, thetas=getattr(args, "thetas", None))
        if args.command == "grid-divergence":
            return cmd_grid_divergence(cfg)
        if args.command == "projection":
            return cmd_projection(cfg, tighten=getattr(args, "tighten", False))
        if args.command == "battle-check":
            return cmd_battle_check(cfg)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except GabtorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
