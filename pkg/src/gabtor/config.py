"""Experiment configuration: a documented key-value tree with central defaults.

The configuration is a plain nested dict loaded from a JSON file and
overridden by ``section.key=value`` assignments.  ``DEFAULTS`` below is the
single source of every default; `--show-config` prints the effective tree.

Sections
--------
grid:        s (samples per unit), P (period units)
window:      kind (gaussian | indicator | hermite | bspline), param
             (hermite index / bspline order, null for the others)
lattice:     p, q with theta = p/q in lowest terms, 0 < theta <= 1
solver:      cg_tol, max_iter, positivity_threshold, bounds_method
             (auto | dense | iterative)
truncation:  R (coefficient box radius), N_max (decay profile order)
check:       leibniz_tol, hermitian_tol, curvature_tol, wexler_raz_tol,
             seed (for the randomized identity draws)
sweep:       thetas (list of "p/q" strings), s, P (sweep grid; every theta
             denominator must divide s and every numerator divide P)
refine:      s_list (increasing sample rates for refinement studies), P
battle:      mode (1 or 2), k, l (adjoint lattice point), kmax (scan radius)
output:      directory, formats (subset of csv/json/svg), log_scale
"""

from __future__ import annotations

import copy
import json
import os
from fractions import Fraction
from typing import Any

from .errors import ParameterError
from .signal import GridSpec, LatticeSpec, Signal, make_window

OUTPUT_DIR_ENV = "GABTOR_OUTPUT_DIR"

DEFAULTS: dict[str, dict[str, Any]] = {
    "grid": {"s": 32, "P": 32},
    "window": {"kind": "gaussian", "param": None},
    "lattice": {"p": 1, "q": 2},
    "solver": {
        "cg_tol": 1e-10,
        "max_iter": 5000,
        "positivity_threshold": 1e-6,
        "bounds_method": "auto",
    },
    "truncation": {"R": 20, "N_max": 8},
    "check": {
        "leibniz_tol": 1e-8,
        "hermitian_tol": 1e-7,
        "curvature_tol": 1e-6,
        "wexler_raz_tol": 1e-8,
        "seed": 7,
    },
    "sweep": {
        "thetas": ["1/2", "3/5", "3/4", "9/10", "19/20"],
        "s": 20,
        "P": 171,
    },
    "refine": {"s_list": [32, 64, 128], "P": 32},
    "battle": {"mode": 1, "k": 2, "l": 1, "kmax": 3},
    "output": {"directory": ".", "formats": ["csv", "json", "svg"], "log_scale": False},
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULTS)


def _merge(base: dict, extra: dict, path: str = "") -> None:
    for key, value in extra.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ParameterError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ParameterError(f"config section {where!r} must be a table")
            _merge(base[key], value, where)
        else:
            base[key] = value


def _parse_scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | None = None, overrides: list[str] | None = None) -> dict:
    """Defaults, overlaid by a JSON file, overlaid by section.key=value pairs."""
    cfg = default_config()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError("config file must contain a JSON object")
        _merge(cfg, data)
    for item in overrides or []:
        if "=" not in item:
            raise ParameterError(f"override {item!r} is not of the form section.key=value")
        key, _, raw = item.partition("=")
        parts = key.strip().split(".")
        if len(parts) != 2:
            raise ParameterError(f"override key {key!r} must be section.key")
        _merge(cfg, {parts[0]: {parts[1]: _parse_scalar(raw.strip())}})
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        cfg["output"]["directory"] = env_dir
    return cfg


def parse_theta(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot parse theta {text!r}: expected p/q") from exc


def config_theta(cfg: dict) -> Fraction:
    try:
        return Fraction(int(cfg["lattice"]["p"]), int(cfg["lattice"]["q"]))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"invalid lattice p/q: {exc}") from exc


def build_grid(cfg: dict) -> GridSpec:
    return GridSpec(int(cfg["grid"]["s"]), int(cfg["grid"]["P"]))


def build_lattice(cfg: dict) -> LatticeSpec:
    return LatticeSpec(config_theta(cfg), build_grid(cfg))


def build_window(cfg: dict, grid: GridSpec) -> Signal:
    kind = cfg["window"]["kind"]
    param = cfg["window"]["param"]
    return make_window(kind, grid, None if param is None else int(param))


def validate(cfg: dict) -> None:
    """Check every cross-field precondition before dispatching a command."""
    grid = build_grid(cfg)
    theta = config_theta(cfg)
    if not (0 < theta <= 1):
        raise ParameterError(f"theta = {theta} must lie in (0, 1]")
    if (grid.s * theta.numerator) % theta.denominator != 0:
        raise ParameterError(
            f"theta*s = {theta}*{grid.s} is not an integer: "
            f"the denominator {theta.denominator} must divide s={grid.s}"
        )
    kind = cfg["window"]["kind"]
    if kind not in ("gaussian", "indicator", "hermite", "bspline"):
        raise ParameterError(f"unknown window kind {kind!r}")
    solver = cfg["solver"]
    if float(solver["cg_tol"]) <= 0 or int(solver["max_iter"]) < 1:
        raise ParameterError("solver.cg_tol must be positive and solver.max_iter >= 1")
    if int(cfg["truncation"]["R"]) < 0 or int(cfg["truncation"]["N_max"]) < 0:
        raise ParameterError("truncation radii must be nonnegative")
    formats = cfg["output"]["formats"]
    bad = [f for f in formats if f not in ("csv", "json", "svg")]
    if bad:
        raise ParameterError(f"unknown output formats {bad}")
