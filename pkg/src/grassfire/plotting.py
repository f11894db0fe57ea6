"""Barcode rendering to SVG, byte-deterministic for identical input.

One horizontal-bar panel per dimension, x axis is the scale. Bars for
infinite intervals run to the right margin and end in an arrowhead; bars
open at the construction cap end in an open (unfilled) arrowhead. Output
bytes are stable across runs: the SVG hash salt is pinned and the creation
date stripped, so re-rendering the same barcode yields an identical file.

Every bar carries an id of the form dim{d}-bar-{i} in the SVG, and every
arrowhead dim{d}-arrow-{i}, which makes rendered output machine-checkable.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .persistence import Barcode

_HASH_SALT = "grassfire-barcode"
_BAR_COLOR = {0: "#1f77b4", 1: "#d62728"}


def render_barcode_svg(barcode: Barcode, path: str | Path, title: str | None = None) -> None:
    """Write the barcode as a two-panel SVG (dim 0 above, dim 1 below)."""
    finite = [iv.death for iv in barcode.intervals if not math.isinf(iv.death)]
    births = [iv.birth for iv in barcode.intervals]
    if math.isfinite(barcode.scale_max):
        hi = barcode.scale_max
    elif finite or births:
        hi = max(finite + births)
    else:
        hi = 1.0
    if hi <= 0:
        hi = 1.0
    x_right = hi * 1.08

    with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT}):
        fig, axes = plt.subplots(2, 1, figsize=(7.0, 4.6), sharex=True)
        for dim, ax in zip((0, 1), axes):
            bars = barcode.in_dim(dim)
            # long bars first so the persistent features sit at the top
            bars = sorted(bars, key=lambda iv: (-(iv.persistence), iv.birth))
            color = _BAR_COLOR[dim]
            for i, iv in enumerate(bars):
                y = len(bars) - i
                x_end = x_right if math.isinf(iv.death) else iv.death
                line, = ax.plot(
                    [iv.birth, x_end], [y, y],
                    color=color, lw=2.2, solid_capstyle="butt",
                )
                line.set_gid(f"dim{dim}-bar-{i}")
                if math.isinf(iv.death) or iv.open_end:
                    arrow = FancyArrowPatch(
                        (x_end - 0.012 * x_right, y),
                        (x_end + 0.02 * x_right, y),
                        arrowstyle="->" if math.isinf(iv.death) else "-|>",
                        mutation_scale=11,
                        color=color,
                        fill=math.isinf(iv.death),
                        clip_on=False,
                    )
                    arrow.set_gid(f"dim{dim}-arrow-{i}")
                    ax.add_patch(arrow)
            ax.set_ylabel(f"$H_{dim}$ bars")
            ax.set_ylim(0, max(len(bars), 1) + 1)
            ax.set_yticks([])
            ax.set_xlim(0, x_right * 1.03)
        axes[1].set_xlabel(r"scale $\varepsilon$")
        if title:
            axes[0].set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
