"""Figure rendering for scan and sweep outputs.

Whenever the command line writes a CSV dataset it also drops a PNG next
to it: region plots for scans (three shades: outside, P only, CP) and
margin-versus-time plots for sweeps.  Rendering uses the non-interactive
backend and fixed metadata so repeated runs produce identical files.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

from divq.process import SweepReport
from divq.scan import ScanResult

__all__ = ["figure_path", "render_region_png", "render_sweep_png"]

_REGION_COLORS = ("#f0f0f0", "#8fb6e0", "#1f4e8c")
_METADATA = {"Software": "divq"}


def figure_path(output_path: str) -> str:
    """PNG path sitting next to a data file: same name, .png suffix."""
    root, _ = os.path.splitext(output_path)
    return (root or output_path) + ".png"


def render_region_png(path: str, result: ScanResult):
    """Region plot of a scan: cells colored outside / P only / CP."""
    levels = result.cp.astype(int) + result.p.astype(int)
    fig, ax = plt.subplots(figsize=(5.4, 4.6), dpi=150)
    ax.pcolormesh(result.axis1, result.axis2, levels.T,
                  cmap=ListedColormap(_REGION_COLORS), vmin=0, vmax=2,
                  shading="nearest", rasterized=True)
    ax.set_xlabel(result.spec.axes[0].name)
    ax.set_ylabel(result.spec.axes[1].name)
    fixed = ", ".join(f"{k}={v:g}" for k, v in sorted(result.spec.fixed.items()))
    title = f"{result.spec.scan_class} scan"
    ax.set_title(f"{title} ({fixed})" if fixed else title, fontsize=10)
    ax.legend(handles=[
        Patch(color=_REGION_COLORS[2], label="CP"),
        Patch(color=_REGION_COLORS[1], label="P only"),
        Patch(color=_REGION_COLORS[0], label="neither"),
    ], loc="upper right", fontsize=8, framealpha=0.9)
    fig.tight_layout()
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)


def render_sweep_png(path: str, report: SweepReport):
    """Margins over time with zero line and refined crossing markers."""
    times = np.asarray(report.times)
    cp_margin = np.array([v.cp_margin for v in report.verdicts], dtype=float)
    fig, ax = plt.subplots(figsize=(5.8, 3.8), dpi=150)
    ax.axhline(0.0, color="0.4", lw=0.8)
    ax.plot(times, cp_margin, label="min eig D", color="#1f4e8c")
    p_margin = [v.p_margin for v in report.verdicts]
    if all(m is not None for m in p_margin):
        ax.plot(times, np.asarray(p_margin, dtype=float), label="min 2p",
                color="#c05020")
    for t in report.cp_crossings:
        ax.axvline(t, color="#1f4e8c", ls="--", lw=0.8)
    for t in report.p_crossings:
        ax.axvline(t, color="#c05020", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("margin")
    ax.set_title(f"sweep: {report.summary}", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)
