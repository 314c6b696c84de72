"""Figure rendering for evaluation and diagnostic reports.

Every figure is written next to its CSV; nothing here is interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_recall_curves(rows: list[dict], path, group_key: str | None = None) -> None:
    """Recall@R curves, one line per value of group_key (rank, scale, ...)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    if group_key is None:
        groups = {"": rows}
    else:
        groups = {}
        for row in rows:
            groups.setdefault(row.get(group_key, ""), []).append(row)
    for label, grp in sorted(groups.items(), key=lambda kv: str(kv[0])):
        grp = sorted(grp, key=lambda r: r["R"])
        ax.plot([r["R"] for r in grp], [r["recall"] for r in grp],
                marker="o", label=f"{group_key}={label}" if group_key else None)
    ax.set_xscale("log")
    ax.set_xlabel("R")
    ax.set_ylabel("Recall@R")
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    if group_key is not None:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_decay(decay_rows_by_label: dict[str, list[dict]], path) -> None:
    """Eigenvalue decay (covariance scale) for one or more spectra."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in sorted(decay_rows_by_label.items(), key=lambda kv: str(kv[0])):
        rows = sorted(rows, key=lambda r: r["k"])
        ax.semilogy([r["k"] for r in rows], [max(r["eigenvalue"], 1e-300) for r in rows],
                    marker=".", label=str(label))
    ax.set_xlabel("k")
    ax.set_ylabel("eigenvalue")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
