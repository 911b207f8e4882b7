"""Matplotlib figures rendered next to the delimited report files."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_section_figure(rows: np.ndarray, path, axis: str, position: float) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    if rows.size:
        for view in np.unique(rows[:, 0]):
            pts = rows[rows[:, 0] == view]
            ax.scatter(pts[:, 1], pts[:, 2], s=3, label=f"view {int(view)}")
        ax.legend(markerscale=3, fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(f"cross-section at {axis} = {position:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_error_history(history, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(1, len(history) + 1), history, marker="o")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("max rotation change (rad)")
    ax.set_title("registration convergence")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_trials(result, path) -> None:
    levels = sorted({level for level, _ in result.trials})
    fig, axes = plt.subplots(1, len(levels), figsize=(4.5 * len(levels), 4),
                             sharey=True, squeeze=False)
    for ax, level in zip(axes[0], levels):
        for strategy in ("chained", "averaged"):
            values = result.trials[(level, strategy)]
            ax.plot(np.arange(1, len(values) + 1), values, marker=".",
                    linewidth=0.8, label=strategy)
        ax.set_title(f"noise level {level:g} rad")
        ax.set_xlabel("trial")
        ax.grid(True, alpha=0.3)
    axes[0][0].set_ylabel("objective")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_retrieval_figure(results, thres_ft: float, path) -> None:
    fig, ax = plt.subplots(figsize=(max(6, 0.25 * len(results)), 4))
    xs = np.arange(len(results))
    finite_errors = [r.best_error for r in results if np.isfinite(r.best_error)]
    cap = 1.2 * max(finite_errors) if finite_errors else 1.0
    heights = [r.best_error if np.isfinite(r.best_error) else cap for r in results]
    colors = ["tab:green" if r.is_face else "tab:gray" for r in results]
    ax.bar(xs, heights, color=colors)
    ax.axhline(thres_ft, color="tab:red", linestyle="--", label="threshold")
    ax.set_xticks(xs)
    ax.set_xticklabels([r.model_id for r in results], rotation=90, fontsize=6)
    ax.set_ylabel("best matching error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_saliency_histogram(values: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=60, color="tab:blue")
    ax.set_xlabel("saliency")
    ax.set_ylabel("vertex count")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
