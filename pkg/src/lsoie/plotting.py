"""Figure rendering for the stats and eval reports."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# keep PNG output byte-stable across runs
_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def plot_tag_distribution(distribution: dict, path, title: str = "Token-level tag distribution"):
    labels = [k for k, v in distribution.items() if v > 0]
    sizes = [distribution[k] for k in labels]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.pie(sizes, labels=labels, autopct="%1.1f%%", startangle=90, counterclock=False)
    ax.set_title(title)
    ax.axis("equal")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_pr_curves(curves: dict, path, title: str = "Precision-recall"):
    """`curves` maps a system name to its PRCurve."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, curve in curves.items():
        pts = sorted(curve.points, key=lambda p: -p[0])
        recall = [0.0] + [p[2] for p in pts]
        precision = [pts[0][1]] + [p[1] for p in pts]
        ax.plot(recall, precision, label=f"{name} (AUC {curve.auc:.3f}, F1 {curve.max_f1:.3f})")
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
