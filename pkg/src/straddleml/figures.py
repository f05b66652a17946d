"""Render report figures to PNG files next to the delimited outputs.

Pure file output: the Agg backend is forced before pyplot is imported, so
rendering works headless.  Every figure takes an AggregateReport, keeping
figure content in lockstep with the CSV series.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .stats_report import METRIC_BOX_NAMES, AggregateReport

_DPI = 120


def _series(points: list[dict]) -> tuple[list[int], list[float]]:
    xs, ys = [], []
    for p in points:
        if p["value"] is not None:
            xs.append(p["iteration"])
            ys.append(p["value"])
    return xs, ys


def _pooled_profits(report: AggregateReport, model: str) -> list[float]:
    pooled: list[float] = []
    for rep in sorted(report.profit_distribution.get(model, {}), key=int):
        pooled.extend(report.profit_distribution[model][rep])
    return pooled


def render_profit_lines(report: AggregateReport, out_dir: str) -> list[str]:
    paths = []
    for key, attr, title, ylabel, fname in (
        ("cumulative", report.cumulative_profit, "Cumulative test profit",
         "cumulative profit", "cumulative_profit.png"),
        ("window", report.per_window_profit, "Profit per test window",
         "window profit", "per_window_profit.png"),
    ):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for model in report.models:
            xs, ys = _series(attr.get(model, []))
            if xs:
                ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=model)
        if key == "window":
            ax.axhline(0.0, color="grey", linewidth=0.8)
        ax.set_xlabel("iteration")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, dpi=_DPI)
        plt.close(fig)
        paths.append(path)
    return paths


def render_profit_distributions(report: AggregateReport, out_dir: str) -> list[str]:
    paths = []
    models = [m for m in report.models if _pooled_profits(report, m)]
    data = [_pooled_profits(report, m) for m in models]
    if not models:
        return paths
    for style, fname in (("violin", "profit_violin.png"), ("box", "profit_box.png")):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        positions = list(range(1, len(models) + 1))
        if style == "violin":
            ax.violinplot(data, positions=positions, showmedians=True)
        else:
            ax.boxplot(data, positions=positions)
        ax.axhline(0.0, color="grey", linewidth=0.8)
        ax.set_xticks(positions)
        ax.set_xticklabels(models, fontsize=8)
        ax.set_ylabel("profit per trade")
        ax.set_title("Distribution of realized trade profits")
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, dpi=_DPI)
        plt.close(fig)
        paths.append(path)
    return paths


def render_metric_boxes(report: AggregateReport, out_dir: str) -> list[str]:
    """Per-window metric distributions, one panel per metric.

    Model labels carry the Bonferroni-adjusted p-value of the comparison
    against the baseline when available.
    """
    by_key: dict[tuple[str, str], list[float]] = {}
    for row in report.metric_boxes:
        if row["value"] is not None:
            by_key.setdefault((row["model"], row["metric"]), []).append(row["value"])
    metrics = [m for m in METRIC_BOX_NAMES if any(k[1] == m for k in by_key)]
    if not metrics:
        return []
    fig, axes = plt.subplots(
        1, len(metrics), figsize=(3.2 * len(metrics), 4.2), squeeze=False
    )
    for ax, metric in zip(axes[0], metrics):
        models = [m for m in report.models if (m, metric) in by_key]
        data = [by_key[(m, metric)] for m in models]
        labels = []
        for model in models:
            entry = report.significance.get(model, {}).get(metric, {})
            p_adj = entry.get("p_adjusted")
            labels.append(model if p_adj is None else f"{model}\np={p_adj:.3f}")
        ax.boxplot(data, positions=list(range(1, len(models) + 1)))
        ax.set_xticks(list(range(1, len(models) + 1)))
        ax.set_xticklabels(labels, fontsize=7)
        ax.set_title(metric, fontsize=9)
    fig.suptitle("Per-window metric distributions")
    fig.tight_layout()
    path = os.path.join(out_dir, "metric_boxes.png")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return [path]


def render_all(report: AggregateReport, out_dir: str) -> list[str]:
    """Render every figure; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    paths += render_profit_lines(report, out_dir)
    paths += render_profit_distributions(report, out_dir)
    paths += render_metric_boxes(report, out_dir)
    return paths
