"""Static SVG figures: learning curves with SE bands, and final G-mean vs budget."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed hash salt and no timestamp so identical inputs give identical files
plt.rcParams["svg.hashsalt"] = "actisiamese"
_SVG_META = {"Date": None}

COLORS = {"incremental": "tab:gray", "actiq": "tab:blue", "actisiamese": "tab:red"}


def render_curves(aggregates: dict, out_path, drift_step=None, title=None):
    """Mean prequential G-mean per learner with a +/- one SE band."""
    if not aggregates:
        raise ValueError("need at least one aggregate curve")
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    horizon = 0
    for name, agg in aggregates.items():
        t = np.arange(len(agg.mean))
        horizon = max(horizon, len(t))
        color = COLORS.get(name)
        ax.plot(t, agg.mean, label=name, color=color, linewidth=1.2)
        ax.fill_between(t, agg.mean - agg.stderr, agg.mean + agg.stderr, color=color, alpha=0.25, linewidth=0)
    if drift_step is not None:
        ax.axvline(drift_step, color="black", linestyle="--", linewidth=0.8, label="drift")
    ax.set_xlim(0, horizon)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("time step")
    ax.set_ylabel("prequential G-mean")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    try:
        fig.savefig(out_path, format="svg", metadata=_SVG_META)
    finally:
        plt.close(fig)
    return out_path


def render_sweep(rows, out_path, title=None):
    """Final G-mean against budget, one line per learner, error bars = SE."""
    by_learner = defaultdict(list)
    for r in rows:
        by_learner[r.learner].append(r)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, rs in by_learner.items():
        rs = sorted(rs, key=lambda r: r.budget)
        budgets = [r.budget for r in rs]
        ax.errorbar(budgets, [r.mean for r in rs], yerr=[r.stderr for r in rs], label=name,
                    color=COLORS.get(name), marker="o", capsize=3)
    ax.set_xscale("log")
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("budget B")
    ax.set_ylabel("final prequential G-mean")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    try:
        fig.savefig(out_path, format="svg", metadata=_SVG_META)
    finally:
        plt.close(fig)
    return Path(out_path)
