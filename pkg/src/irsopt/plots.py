"""Figure rendering for benchmark CSV rows.

Kept separate from bench so the experiment path never imports matplotlib
unless a figure was actually requested.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "aogd": dict(color="tab:blue", marker="o"),
    "ag": dict(color="tab:orange", marker="s"),
    "bb": dict(color="tab:green", marker="^"),
    "bcd": dict(color="tab:red", marker="v"),
    "manifold": dict(color="tab:purple", marker="d"),
    "grid": dict(color="black", marker="*"),
}


def _style(method):
    return _STYLES.get(method, dict(marker="x"))


def _ok(rows):
    return [r for r in rows if r[4] >= 0]


def plot_convergence(rows, path):
    """Median objective trajectory per method (across realizations)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    methods = sorted({r[1] for r in _ok(rows)})
    for method in methods:
        per_iter = {}
        for r in _ok(rows):
            if r[1] == method:
                per_iter.setdefault(r[4], []).append(r[5])
        its = sorted(per_iter)
        med = [float(np.median(per_iter[t])) for t in its]
        ax.plot(its, med, label=method, markevery=max(1, len(its) // 12),
                **_style(method))
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective (median over realizations)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_sweep(rows, path):
    """Mean rate against M with one-sigma error bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    methods = sorted({r[1] for r in _ok(rows)})
    for method in methods:
        pts = sorted((r[2], r[6], r[7]) for r in _ok(rows) if r[1] == method)
        ms = [p[0] for p in pts]
        ax.errorbar(ms, [p[1] for p in pts], yerr=[p[2] for p in pts],
                    label=method, capsize=3, **_style(method))
    ax.set_xlabel("number of reflecting elements M")
    ax.set_ylabel("mean rate (bits)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_timing(rows, path):
    """Median wall time against M, log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    methods = sorted({r[1] for r in _ok(rows)})
    for method in methods:
        pts = sorted((r[2], r[10]) for r in _ok(rows) if r[1] == method)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=method,
                **_style(method))
    ax.set_yscale("log")
    ax.set_xlabel("number of reflecting elements M")
    ax.set_ylabel("median wall time (ms)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_oracle(rows, path):
    """Solver value against the exhaustive grid value per realization."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    grid = {r[3]: r[5] for r in _ok(rows) if r[1] == "grid"}
    for method in sorted({r[1] for r in _ok(rows)} - {"grid"}):
        pairs = sorted((r[3], r[5]) for r in _ok(rows) if r[1] == method)
        xs = [grid[k] for k, _ in pairs if k in grid]
        ys = [v for k, v in pairs if k in grid]
        ax.scatter(xs, ys, label=method, s=18, **_style(method))
    lo, hi = ax.get_xlim()
    ax.plot([lo, hi], [lo, hi], color="gray", linewidth=0.8, zorder=0)
    ax.set_xlabel("exhaustive grid objective")
    ax.set_ylabel("solver objective")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render(experiment, rows, csv_path):
    """Render the figure matching `experiment` next to its CSV file.
    Returns the figure path."""
    fig_path = csv_path[:-4] + ".svg" if csv_path.endswith(".csv") \
        else csv_path + ".svg"
    {
        "convergence": plot_convergence,
        "sweep": plot_sweep,
        "timing": plot_timing,
        "oracle": plot_oracle,
    }[experiment](rows, fig_path)
    return fig_path
