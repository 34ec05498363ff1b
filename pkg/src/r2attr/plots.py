"""Figures written next to the delimited reports."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "r2attr",
}


def figsize(width=6.0, ratio=None):
    ratio = ratio or (math.sqrt(5) - 1) / 2
    return (width, width * ratio)


def _bars(ax, labels, series, errors=None):
    x = np.arange(len(labels))
    k = len(series)
    w = 0.8 / k
    for i, (name, vals) in enumerate(series.items()):
        err = None if errors is None else errors.get(name)
        if err is not None and not np.all(np.isfinite(err)):
            err = None
        ax.bar(x + (i - (k - 1) / 2) * w, vals, w, yerr=err, label=name, capsize=2)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45 if len(labels) > 8 else 0, ha="right" if len(labels) > 8 else "center")
    ax.set_ylabel("share of explained variance")
    if k > 1:
        ax.legend(frameon=False)


def plot_attribution(result, path) -> None:
    """Bar chart of normalized (and, if present, hybrid) shares."""
    series = {"raw": result.share}
    if result.share_hybrid is not None:
        series["hybrid"] = result.share_hybrid
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize(max(4.0, 0.35 * len(result.channels) + 2)))
        _bars(ax, list(result.channels), series)
        ax.set_title(f"{result.method.upper()} / {result.model} model (R² = {result.r2:.3f})")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
        plt.close(fig)


def plot_replication(summary, path) -> None:
    """Mean shares with one-sd error bars for each model/method pair."""
    series = {f"{m.upper()} {model}": summary.mean(model, m) for model, m in summary.shares}
    errors = {f"{m.upper()} {model}": summary.sd(model, m) for model, m in summary.shares}
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize())
        _bars(ax, list(summary.channels), series, errors)
        ax.set_title(f"Simulation example {summary.example}, {summary.replicates} replicates")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
        plt.close(fig)
