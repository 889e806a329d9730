"""Matplotlib figure rendering with reproducible SVG output.

Figures are saved as SVG with a fixed hash salt and no date metadata, so a
rerun with identical inputs produces byte-identical files.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from . import fileio
from .report import ClusterProfile, loess_fit
from .selection import SweepTable

_RC = {
    "svg.hashsalt": "terracut",
    "figure.dpi": 100,
    "font.size": 10,
}


def save_svg(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    fileio.atomic_write_bytes(path, buf.getvalue())


def sweep_chart(table: SweepTable, path) -> None:
    """Mean silhouette against k, one line per radius; smallest radius in
    black, as the reference setting."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        styles = ["-", "--", "-.", ":"]
        for i, r in enumerate(table.r_grid):
            ks, scores = [], []
            for row in table.rows:
                if row.r == r and row.silhouette is not None:
                    ks.append(row.k)
                    scores.append(row.silhouette)
            if not ks:
                continue
            if i == 0:
                ax.plot(ks, scores, "-", color="black", label=f"r={r:g}")
            else:
                ax.plot(ks, scores, styles[i % len(styles)], label=f"r={r:g}")
        ax.set_xlabel("number of clusters k")
        ax.set_ylabel("mean silhouette")
        ax.legend(fontsize=8)
        fig.tight_layout()
        save_svg(fig, path)


def profile_chart(profile: ClusterProfile, names: list[str], path) -> None:
    """Standardized mean per indicator for one cluster, zero line marked."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        pos = np.arange(len(names))
        ax.barh(pos, profile.scaled_means, color="#4e79a7")
        ax.axvline(0.0, color="black", linewidth=0.8)
        ax.set_yticks(pos)
        ax.set_yticklabels(names, fontsize=8)
        ax.invert_yaxis()
        ax.set_xlabel("standardized mean")
        ax.set_title(f"cluster {profile.cluster} (n={profile.size})")
        fig.tight_layout()
        save_svg(fig, path)


def curves_chart(var_name: str, grid, probs, class_labels, path) -> None:
    """Per-class predicted probability as one covariate moves along grid."""
    probs = np.asarray(probs)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for k, label in enumerate(class_labels):
            ax.plot(grid, probs[:, k], label=f"cluster {label}", linewidth=1.2)
        ax.set_xlabel(f"{var_name} (standardized)")
        ax.set_ylabel("predicted probability")
        ax.set_ylim(0, 1)
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        save_svg(fig, path)


def scatter_smooth_chart(x, y, xlabel: str, ylabel: str, span: float, path) -> None:
    """Scatter of two indicators with a loess trend line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fitted = loess_fit(x, y, span=span)
    order = np.argsort(x, kind="stable")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.scatter(x, y, s=8, alpha=0.5, color="#4e79a7", edgecolors="none")
        ax.plot(x[order], fitted[order], color="#e15759", linewidth=1.6)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        save_svg(fig, path)


def cv_chart(lambdas, mean_deviance, chosen: float, path) -> None:
    """Cross-validated deviance along the penalty path (log x-axis)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(np.asarray(lambdas), np.asarray(mean_deviance), color="#4e79a7")
        ax.axvline(chosen, color="#e15759", linewidth=1.0, linestyle="--")
        ax.set_xscale("log")
        ax.set_xlabel("lambda")
        ax.set_ylabel("mean CV deviance")
        fig.tight_layout()
        save_svg(fig, path)
