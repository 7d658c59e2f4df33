"""Report figures: metric bars and discrepancy histograms, rendered to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import DiscrepancyStats, MetricsReport

METRIC_COLORS = {"executability": "#4878cf", "feasibility": "#6acc65", "success": "#d65f5f"}


def metrics_figure(report: MetricsReport, path: Path | str) -> Path:
    """Grouped bars per task for the three rates, Total included."""
    rows = report.rows + [report.total]
    labels = [r.label for r in rows]
    x = np.arange(len(rows))
    width = 0.27
    fig, ax = plt.subplots(figsize=(max(6.0, 1.35 * len(rows)), 4.2))
    ax.bar(x - width, [r.executability * 100 for r in rows], width,
           label="Executability", color=METRIC_COLORS["executability"])
    ax.bar(x, [r.feasibility * 100 for r in rows], width,
           label="Feasibility", color=METRIC_COLORS["feasibility"])
    ax.bar(x + width, [r.success_rate * 100 for r in rows], width,
           label="Success rate", color=METRIC_COLORS["success"])
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=9)
    ax.set_ylabel("rate [%]")
    ax.set_ylim(0, 105)
    ax.grid(axis="y", alpha=0.3)
    ax.legend(loc="lower left", fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def discrepancy_figure(stats: DiscrepancyStats, path: Path | str,
                       band: tuple[float, float] | None = None) -> Path:
    """Histogram of planar detection gaps with min/median/max markers."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(stats.samples * 1000, bins=40, color="#4878cf", alpha=0.85)
    for value, name in ((stats.minimum, "min"), (stats.median, "median"), (stats.maximum, "max")):
        ax.axvline(value * 1000, color="k", linestyle="--", linewidth=0.9)
        ax.text(value * 1000, ax.get_ylim()[1] * 0.95, f" {name}", rotation=90,
                va="top", fontsize=8)
    if band is not None:
        ax.axvspan(band[0] * 1000, band[1] * 1000, color="#6acc65", alpha=0.2,
                   label="target median band")
        ax.legend(fontsize=9)
    ax.set_xlabel("planar discrepancy [mm]")
    ax.set_ylabel("detections")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
