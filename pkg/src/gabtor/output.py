"""CSV and JSON emitters. All output is deterministic: fixed headers, fixed
key order, shortest-roundtrip float formatting, no timestamps."""

from __future__ import annotations

import json
import math
import os
from typing import Any

from .algebra import AlgebraElement, DecayProfile
from .connection import DiagnosticsTable
from .frame import CoefficientArray, FrameBounds
from .signal import Signal


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _finite_or_none(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-safe plain data (non-finite floats -> null)."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _finite_or_none(obj.real), "im": _finite_or_none(obj.imag)}
    if isinstance(obj, float):
        return _finite_or_none(obj)
    return obj


def write_json(path: str, payload: dict) -> None:
    _write(path, json.dumps(jsonable(payload), indent=2, allow_nan=False) + "\n")


def write_signal_csv(f: Signal, path: str) -> None:
    lines = ["index,t,re,im"]
    t = f.grid.points
    for j in range(f.grid.n):
        v = f.values[j]
        lines.append(f"{j},{_fmt(t[j])},{_fmt(v.real)},{_fmt(v.imag)}")
    _write(path, "\n".join(lines) + "\n")


def write_coefficients_csv(c: CoefficientArray, path: str) -> None:
    lines = ["k,l,re,im"]
    K, s = c.values.shape
    for k in range(K):
        for l in range(s):
            v = c.values[k, l]
            lines.append(f"{k},{l},{_fmt(v.real)},{_fmt(v.imag)}")
    _write(path, "\n".join(lines) + "\n")


def write_frame_bounds_csv(b: FrameBounds, path: str) -> None:
    _write(
        path,
        "A,B,method,iterations,residual\n"
        f"{_fmt(b.lower)},{_fmt(b.upper)},{b.method},{b.iterations},{_fmt(b.residual)}\n",
    )


def write_algebra_csv(a: AlgebraElement, path: str) -> None:
    lines = ["k,l,re,im"]
    for ki, k in enumerate(a.k_indices()):
        for li, l in enumerate(a.l_indices()):
            v = a.coeffs[ki, li]
            lines.append(f"{k},{l},{_fmt(v.real)},{_fmt(v.imag)}")
    _write(path, "\n".join(lines) + "\n")


def write_decay_csv(p: DecayProfile, path: str) -> None:
    lines = ["N,shell_sup"]
    for N, sup in enumerate(p.shell_sups):
        lines.append(f"{N},{_fmt(sup)}")
    _write(path, "\n".join(lines) + "\n")


def write_table_csv(table: DiagnosticsTable, path: str) -> None:
    residual_names = table.residual_names()
    header = ["key", "A", "B", "U_g", "U_h", "U_prod"]
    header += [f"residual_{name}" for name in residual_names]
    header.append("status")
    lines = [",".join(header)]
    for row in table.rows:
        cells = [_fmt(row.key), _fmt(row.lower), _fmt(row.upper),
                 _fmt(row.u_g), _fmt(row.u_h), _fmt(row.u_prod)]
        for name in residual_names:
            cells.append(_fmt(row.residuals.get(name, float("nan"))))
        cells.append(row.status)
        lines.append(",".join(cells))
    _write(path, "\n".join(lines) + "\n")


def table_payload(table: DiagnosticsTable) -> dict:
    return {
        "key_name": table.key_name,
        "rows": [
            {
                "key": row.key,
                "A": row.lower,
                "B": row.upper,
                "U_g": row.u_g,
                "U_h": row.u_h,
                "U_prod": row.u_prod,
                "residuals": dict(row.residuals),
                "status": row.status,
            }
            for row in table.rows
        ],
        "summary": dict(table.summary),
    }
