"""Report figures: rendered to files next to the delimited outputs.

All figures use the Agg backend and fixed metadata so repeated runs
produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KW = {"dpi": 120, "metadata": {"Software": "rtlt"}}

GROUP_COLORS = {1: "#c0392b", 2: "#e67e22", 3: "#2980b9", 4: "#7f8c8d"}


def save_pred_scatter(path: str, labels, preds, groups=None,
                      title: str = "predicted vs label arrival") -> str:
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    if groups is not None:
        colors = [GROUP_COLORS.get(g, "#333333") for g in groups]
        ax.scatter(labels, preds, s=14, c=colors, alpha=0.75, linewidths=0)
        for g, c in GROUP_COLORS.items():
            ax.scatter([], [], s=14, c=c, label=f"group {g}")
        ax.legend(loc="lower right", fontsize=8)
    else:
        ax.scatter(labels, preds, s=14, alpha=0.75, linewidths=0)
    lo = min(min(labels), min(preds))
    hi = max(max(labels), max(preds))
    ax.plot([lo, hi], [lo, hi], "k--", linewidth=0.8)
    ax.set_xlabel("label arrival (pseudo-ns)")
    ax.set_ylabel("predicted arrival (pseudo-ns)")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_arrival_hist(path: str, labels, preds,
                      title: str = "arrival distribution") -> str:
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    ax.hist(labels, bins=40, alpha=0.55, label="label")
    ax.hist(preds, bins=40, alpha=0.55, label="predicted")
    ax.set_xlabel("arrival (pseudo-ns)")
    ax.set_ylabel("endpoints")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_metric_bars(path: str, names, values, ylabel: str,
                     title: str) -> str:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(names) + 1.5), 3.4))
    ax.bar(range(len(names)), values, color="#2980b9")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


__all__ = ["save_pred_scatter", "save_arrival_hist", "save_metric_bars"]
