"""Matplotlib renders of the comparison report, written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CONV_COLOR, LLM_COLOR = "#2a5db0", "#2e9e52"


def render_comparison_figures(report, out_dir: str | Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    paths["fig_per_subject"] = _per_subject(report, out_dir)
    paths["fig_error_density"] = _error_density(report, out_dir)
    paths["fig_confusion"] = _confusion(report, out_dir)
    return paths


def _per_subject(report, out_dir: Path) -> Path:
    subjects = list(report.per_subject)
    x = np.arange(len(subjects))
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for ax, metric, title in ((axes[0], "hr_mae", "Heart rate MAE (BPM)"),
                              (axes[1], "spo2_mae", "SpO2 MAE (%)")):
        conv = [report.per_subject[s][f"conv_{metric}"] for s in subjects]
        llm = [report.per_subject[s][f"llm_{metric}"] for s in subjects]
        width = 0.38
        ax.bar(x - width / 2, [np.nan if v is None else v for v in conv],
               width, label="conventional", color=CONV_COLOR)
        ax.bar(x + width / 2, [np.nan if v is None else v for v in llm],
               width, label="model", color=LLM_COLOR)
        ax.set_xticks(x, subjects, rotation=45, fontsize=8)
        ax.set_title(title)
        ax.set_xlabel("subject")
        ax.legend()
    fig.tight_layout()
    path = out_dir / "per_subject_deltas.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _error_density(report, out_dir: Path) -> Path:
    bins = report.error_bins
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for ax, metric, unit in ((axes[0], "hr", "BPM"), (axes[1], "spo2", "%")):
        edges = np.asarray(bins[f"{metric}_bin_edges"])
        centers = (edges[:-1] + edges[1:]) / 2
        ax.plot(centers, bins[f"{metric}_conventional"], color=CONV_COLOR,
                label="conventional")
        ax.plot(centers, bins[f"{metric}_llm"], color=LLM_COLOR, label="model")
        ax.set_xlabel(f"absolute {metric} error ({unit})")
        ax.set_ylabel("windows")
        ax.legend()
    fig.tight_layout()
    path = out_dir / "error_density.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _confusion(report, out_dir: Path) -> Path:
    labels = ("sit", "walk", "run")
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, matrix, title in ((axes[0], report.confusion_conv, "conventional"),
                              (axes[1], report.confusion_llm, "model")):
        data = np.asarray(matrix)
        ax.imshow(data, cmap="Blues")
        for i in range(3):
            for j in range(3):
                ax.text(j, i, str(data[i, j]), ha="center", va="center",
                        fontsize=11)
        ax.set_xticks(range(3), labels)
        ax.set_yticks(range(3), labels)
        ax.set_xlabel("predicted")
        ax.set_ylabel("truth")
        ax.set_title(title)
    fig.tight_layout()
    path = out_dir / "confusion.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_cost_figure(summary, out_dir: str | Path) -> Path:
    """Per-query cost series: tiered vs single-model baseline."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    x = np.arange(1, len(summary.queries) + 1)
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(x, [q.baseline_usd for q in summary.queries], marker="o",
            color=CONV_COLOR, label="single-model baseline")
    ax.plot(x, [q.tiered_usd for q in summary.queries], marker="o",
            color=LLM_COLOR, label="tiered")
    ax.set_xlabel("query")
    ax.set_ylabel("USD")
    ax.set_title("Per-query inference cost")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "cost_per_query.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
