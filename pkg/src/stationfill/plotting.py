"""Static RMSE comparison charts: one panel per (station, variable)."""
from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import EmptyReport
from .evaluate import EvalReport

# Fixed hash salt keeps SVG element ids, and therefore bytes, reproducible.
matplotlib.rcParams["svg.hashsalt"] = "stationfill"

_METHOD_STYLE = {
    "nr": dict(color="#1f77b4", marker="o"),
    "gc": dict(color="#d62728", marker="s"),
    "nrgc": dict(color="#2ca02c", marker="^"),
    "nn": dict(color="#9467bd", marker="d"),
}


def emit_plot(report: EvalReport, path: Union[str, Path]) -> None:
    """Write a self-contained SVG: x = missingness level, y = RMSE,
    one line per method, one panel per (station, variable).

    Identical reports produce identical bytes.
    """
    if not report.cells:
        raise EmptyReport("report has no cells to plot")
    panels = sorted(
        {(c.station_id, c.variable) for c in report.cells},
        key=lambda p: (p[0], p[1].value),
    )
    methods = [m for m in report.config.methods]
    levels = list(report.config.levels)

    ncols = 2 if len(panels) > 1 else 1
    nrows = -(-len(panels) // ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(5.5 * ncols, 3.4 * nrows), squeeze=False
    )
    by_key = {
        (c.station_id, c.variable, c.method, c.level): c.rmse for c in report.cells
    }
    for idx, (station_id, variable) in enumerate(panels):
        ax = axes[idx // ncols][idx % ncols]
        for method in methods:
            ys = [
                by_key.get((station_id, variable, method, lv))
                for lv in levels
            ]
            ys = [np.nan if y is None else y for y in ys]
            style = _METHOD_STYLE.get(method.value, {})
            ax.plot(levels, ys, label=method.value.upper(), **style)
        ax.set_title(f"{station_id} / {variable.value}")
        ax.set_xlabel("missingness level")
        ax.set_ylabel("RMSE")
        ax.set_xticks(levels)
        ax.grid(True, alpha=0.3)
        if idx == 0:
            ax.legend(fontsize=8)
    for idx in range(len(panels), nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(str(path), format="svg", metadata={"Date": None})
    plt.close(fig)
