"""Figure rendering for the report path.

Renders diagnostic tables and windows to files next to the CSV/JSON
output.  SVG output is kept byte-deterministic by pinning the hash salt
and dropping the date metadata.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "gabtor"

import matplotlib.pyplot as plt
import numpy as np

from .algebra import AlgebraElement
from .connection import DiagnosticsTable
from .signal import Signal

_SAVE_KW = {"metadata": {"Date": None}}


def _save(fig, path: str) -> None:
    kw = _SAVE_KW if path.endswith(".svg") else {}
    fig.savefig(path, **kw)
    plt.close(fig)


def plot_table(table: DiagnosticsTable, path: str, log_scale: bool = False, title: str = "") -> None:
    """Line plot with one series per numeric column of the table."""
    keys = [row.key for row in table.rows]
    series: dict[str, list[float]] = {
        "A": [r.lower for r in table.rows],
        "B": [r.upper for r in table.rows],
        "U_g": [r.u_g for r in table.rows],
        "U_h": [r.u_h for r in table.rows],
        "U_prod": [r.u_prod for r in table.rows],
    }
    for name in table.residual_names():
        series[f"residual_{name}"] = [r.residuals.get(name, float("nan")) for r in table.rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, ys in series.items():
        pts = [(k, y) for k, y in zip(keys, ys) if math.isfinite(y) and (not log_scale or y > 0)]
        if not pts:
            continue
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3, label=name)
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel(table.key_name)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_signal(f: Signal, path: str, title: str = "") -> None:
    t = f.grid.points
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(t, f.values.real, label="re", linewidth=1.0)
    ax.plot(t, f.values.imag, label="im", linewidth=1.0)
    ax.plot(t, np.abs(f.values), label="abs", linewidth=1.0, linestyle="--")
    ax.set_xlabel("t")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_algebra(a: AlgebraElement, path: str, title: str = "") -> None:
    """log10-magnitude heat map of the coefficient box."""
    mags = np.abs(a.coeffs)
    floor = 1e-17
    img = np.log10(np.maximum(mags, floor))
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(
        img.T,
        origin="lower",
        extent=(-a.rk - 0.5, a.rk + 0.5, -a.rl - 0.5, a.rl + 0.5),
        aspect="auto",
    )
    fig.colorbar(im, ax=ax, label="log10 |a[k,l]|")
    ax.set_xlabel("k")
    ax.set_ylabel("l")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)
