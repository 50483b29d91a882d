"""Figure emitters for result tables.

Figures are rendered headlessly and written wherever the caller points them;
the CLI drops an .svg next to each table's CSV. BER tables become semilog
curves (with the MFSK reference overlaid when it applies), phase tables
become success-rate heatmaps with the 0.5-crossing contour and the shipped
TST reference line, complexity tables become the measured and modelled cost
maps side by side.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .baseband import theoretical_ber_mfsk
from .results import ResultTable
from .validate import load_tst_contour

_MARKERS = ["o", "s", "^", "v", "d", "x", "*", "+"]


def plot_ber(table: ResultTable, out_path: str | Path, theory: bool = True) -> Path:
    axis = "ebn0_db" if any("ebn0_db" in r for r in table.rows) else "snr_db"
    fig, ax = plt.subplots(figsize=(7, 5))
    operators: list[str] = []
    for row in table.rows:
        if row["operator"] not in operators:
            operators.append(row["operator"])
    for i, op in enumerate(operators):
        rows = sorted(
            (r for r in table.rows if r["operator"] == op), key=lambda r: r[axis]
        )
        x = [r[axis] for r in rows]
        b = [r["ber"] for r in rows]
        ax.semilogy(x, b, marker=_MARKERS[i % len(_MARKERS)], label=op)

    spec = table.meta.get("spec", {})
    if theory and spec.get("sparsity", 1) == 1 and "identity" in operators:
        alphabet = 2 ** spec.get("m", 10) - 1
        xs = sorted({r[axis] for r in table.rows})
        grid = np.linspace(min(xs), max(xs), 60)
        variant = "ebn0" if axis == "ebn0_db" else "snr"
        pb = [theoretical_ber_mfsk(alphabet, 10 ** (v / 10.0), variant) for v in grid]
        keep = [(v, p) for v, p in zip(grid, pb) if p > 1e-12]
        ax.semilogy(
            [v for v, _ in keep],
            [p for _, p in keep],
            "k--",
            label="MFSK theory",
            linewidth=1,
        )

    ax.set_xlabel("Eb/N0 [dB]" if axis == "ebn0_db" else "SNR [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"BER, m={spec.get('m', '?')}, S={spec.get('sparsity', '?')}")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def _phase_grid(rows: list[dict], value_key: str):
    deltas = sorted({r["delta"] for r in rows})
    rhos = sorted({r["rho"] for r in rows})
    grid = np.full((len(rhos), len(deltas)), math.nan)
    for r in rows:
        grid[rhos.index(r["rho"]), deltas.index(r["delta"])] = r[value_key]
    return np.array(deltas), np.array(rhos), grid


def plot_phase(table: ResultTable, out_path: str | Path, tst: bool = True) -> Path:
    operators = sorted({r["operator"] for r in table.rows})
    fig, axes = plt.subplots(
        1, len(operators), figsize=(5.5 * len(operators), 4.6), squeeze=False
    )
    contour = table.meta.get("contour_05", [])
    for ax, op in zip(axes[0], operators):
        rows = [r for r in table.rows if r["operator"] == op]
        deltas, rhos, grid = _phase_grid(rows, "success_rate")
        mesh = ax.pcolormesh(
            deltas, rhos, grid, shading="nearest", vmin=0, vmax=1, cmap="viridis"
        )
        cross = [
            (c["delta"], c["rho_cross"])
            for c in contour
            if c["operator"] == op and c["rho_cross"] is not None
        ]
        if cross:
            ax.plot(*zip(*cross), "w-o", markersize=3, label="0.5 crossing")
        if tst:
            ref = load_tst_contour()
            ax.plot(
                [p[0] for p in ref],
                [p[1] for p in ref],
                "k--",
                linewidth=1.2,
                label="TST reference",
            )
        ax.set_xlabel(r"$\delta$ = M/N")
        ax.set_ylabel(r"$\rho$ = S/M")
        ax.set_title(op)
        ax.legend(loc="upper left", fontsize=8)
        fig.colorbar(mesh, ax=ax, label="success rate")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_complexity(table: ResultTable, out_path: str | Path) -> Path:
    rows = table.rows
    c = table.meta.get("fitted_c", 0.0)
    deltas, rhos, iters = _phase_grid(rows, "mean_iterations")
    wall = _phase_grid(rows, "wall_s")[2]
    trials = _phase_grid(rows, "trials")[2]
    flops = _phase_grid(rows, "mean_flops")[2]
    measured = wall / trials
    predicted = flops + c * iters
    measured = measured / np.nanmax(measured)
    predicted = predicted / np.nanmax(predicted)

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))
    for ax, grid, title in (
        (axes[0], iters, "mean iterations"),
        (axes[1], measured, "measured time (normalized)"),
        (axes[2], predicted, "modelled cost (normalized)"),
    ):
        mesh = ax.pcolormesh(deltas, rhos, grid, shading="nearest", cmap="magma")
        ax.set_xlabel(r"$\delta$ = M/N")
        ax.set_ylabel(r"$\rho$ = S/M")
        ax.set_title(title)
        fig.colorbar(mesh, ax=ax)
    corr = table.meta.get("predicted_measured_correlation")
    if corr is not None:
        fig.suptitle(f"normalized correlation = {corr:.3f}", y=1.0)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_table(table: ResultTable, out_path: str | Path) -> Path:
    kind = table.kind
    if kind == "phase":
        return plot_phase(table, out_path)
    if kind == "complexity":
        return plot_complexity(table, out_path)
    return plot_ber(table, out_path)
