"""Matplotlib figure rendering for the report path."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import summed_confusion
from .model import BANDS, N_CHANNELS, EvalReport


def render_confusion(report: EvalReport, path) -> None:
    counts = summed_confusion(report)
    props = counts / np.maximum(counts.sum(axis=1, keepdims=True), 1)
    fig, ax = plt.subplots(figsize=(4, 3.5))
    im = ax.imshow(props, cmap="Blues", vmin=0, vmax=1)
    ax.set_xticks([0, 1], ["focused", "unfocused"])
    ax.set_yticks([0, 1], ["focused", "unfocused"])
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(2):
        for j in range(2):
            ax.text(
                j,
                i,
                f"{counts[i, j]}\n{props[i, j]:.2%}",
                ha="center",
                va="center",
                color="black" if props[i, j] < 0.6 else "white",
            )
    ax.set_title(report.config.get("model", ""))
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_metrics_per_run(report: EvalReport, path) -> None:
    runs = np.arange(len(report.per_run))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name, marker in (("accuracy", "o"), ("f1", "s"), ("auc", "^")):
        vals = [getattr(m, name) for m in report.per_run]
        vals = [np.nan if v is None else v for v in vals]
        ax.plot(runs, vals, marker=marker, markersize=4, label=name)
    ax.set_xlabel("run")
    ax.set_ylabel("score")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title(report.config.get("model", ""))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_band_ablation(reports: list[EvalReport], path) -> None:
    """One bar per band config; error bar is the per-run std."""
    labels = [r.config.get("band", "?") for r in reports]
    means = [r.mean("accuracy") for r in reports]
    stds = [r.std("accuracy") for r in reports]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(labels, means, yerr=stds, capsize=4, color="tab:blue", alpha=0.85)
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.05)
    ax.axhline(0.5, color="gray", linestyle="--", linewidth=0.8)
    ax.set_title("band ablation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_topomap(rows, path) -> None:
    """Channel x band heatmaps of mean DE, one panel per state.

    Without electrode geometry this is a grid rendering, not a scalp
    projection: channels on the y axis, bands on the x axis.
    """
    band_names = [b.name.value for b in BANDS]
    grids = {}
    for channel, band, state, mean_de, _n in rows:
        grid = grids.setdefault(state, np.full((N_CHANNELS, len(BANDS)), np.nan))
        grid[channel, band_names.index(band)] = mean_de
    states = sorted(grids)
    finite = np.concatenate([g[np.isfinite(g)] for g in grids.values()])
    vmin, vmax = (finite.min(), finite.max()) if finite.size else (0, 1)
    fig, axes = plt.subplots(1, len(states), figsize=(3.2 * len(states), 6), squeeze=False)
    for ax, state in zip(axes[0], states):
        im = ax.imshow(grids[state], aspect="auto", cmap="viridis", vmin=vmin, vmax=vmax)
        ax.set_xticks(range(len(BANDS)), band_names, rotation=45, fontsize=7)
        ax.set_ylabel("channel")
        ax.set_title(state)
    fig.colorbar(im, ax=axes[0].tolist(), label="mean DE (bits)")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
