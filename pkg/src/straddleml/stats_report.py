"""Aggregate walk-forward results into tables, profit series, and paired tests.

The headline table pools every test window per (model, repetition), computes
the metric suite once over the pooled sample, then averages across
repetitions.  Per-window metric values drive the paired significance tests:
each model is compared against the always-trade baseline with a two-sided
Wilcoxon signed-rank test over windows, Bonferroni-adjusted across the
models compared on the same metric.

The signed-rank test drops zero differences, is exact (conditional on the
observed ranks) up to 25 effective pairs via subset-sum counting over
doubled midranks, and switches to the tie-corrected normal approximation
with continuity correction beyond that.  Fewer than five effective pairs is
an error unless every difference is zero, which degenerates to p = 1.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DataError
from .metrics import METRIC_TABLE_ROWS, metrics_row
from .prequential import ALL_MODEL_ID, WindowResult

MIN_PAIRS = 5
EXACT_LIMIT = 25
METRIC_BOX_NAMES = ("accuracy", "f1", "roc_auc", "avg_profit")


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of positive ranks
    p_value: float
    n: int  # pairs remaining after dropping zero differences
    method: str  # "exact", "normal", or "degenerate"


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(diffs: np.ndarray) -> WilcoxonResult:
    """Two-sided signed-rank test on paired differences."""
    d = np.asarray(diffs, dtype=float)
    if not np.isfinite(d).all():
        raise ValueError("differences must be finite")
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(statistic=0.0, p_value=1.0, n=0, method="degenerate")
    if n < MIN_PAIRS:
        raise ValueError(f"need at least {MIN_PAIRS} non-zero differences, got {n}")
    ranks = _midranks(np.abs(d))
    w_pos = float(ranks[d > 0.0].sum())

    if n <= EXACT_LIMIT:
        # midranks are multiples of 1/2, so doubled ranks are exact integers
        scaled = np.rint(2.0 * ranks).astype(np.int64)
        total = int(scaled.sum())
        counts = np.zeros(total + 1)
        counts[0] = 1.0
        for s in scaled:
            counts[s:] += counts[: len(counts) - s].copy()
        w2 = int(round(2.0 * w_pos))
        denom = 2.0**n
        p_le = counts[: w2 + 1].sum() / denom
        p_ge = counts[w2:].sum() / denom
        p = min(1.0, 2.0 * min(p_le, p_ge))
        return WilcoxonResult(statistic=w_pos, p_value=p, n=n, method="exact")

    mu = n * (n + 1) / 4.0
    tie_term = 0.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    for t in tie_counts:
        tie_term += (t**3 - t) / 48.0
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    sigma = math.sqrt(sigma2)
    if w_pos > mu:
        z = (w_pos - mu - 0.5) / sigma
    elif w_pos < mu:
        z = (w_pos - mu + 0.5) / sigma
    else:
        z = 0.0
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return WilcoxonResult(statistic=w_pos, p_value=p, n=n, method="normal")


def bonferroni(p_value: float, n_comparisons: int) -> float:
    """Familywise-adjusted p-value: scale by the comparison count, cap at 1."""
    if n_comparisons < 1:
        raise ValueError("n_comparisons must be positive")
    return min(1.0, n_comparisons * p_value)


@dataclass
class AggregateReport:
    models: list[str]
    weight_mode: str
    n_iterations: int
    table: dict[str, dict[str, float | None]]
    significance: dict[str, dict[str, dict[str, Any]]]
    per_window_profit: dict[str, list[dict[str, Any]]]
    cumulative_profit: dict[str, list[dict[str, Any]]]
    profit_distribution: dict[str, dict[str, list[float]]]
    metric_boxes: list[dict[str, Any]]
    thresholds: dict[str, list[dict[str, Any]]]
    skipped: list[dict[str, Any]] = field(default_factory=list)
    since: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "models": self.models,
            "weight_mode": self.weight_mode,
            "n_iterations": self.n_iterations,
            "table": self.table,
            "significance": self.significance,
            "per_window_profit": self.per_window_profit,
            "cumulative_profit": self.cumulative_profit,
            "profit_distribution": self.profit_distribution,
            "metric_boxes": self.metric_boxes,
            "thresholds": self.thresholds,
            "skipped": self.skipped,
            "since": self.since,
        }


def _mean_or_none(values: list[float | None]) -> float | None:
    if not values or any(v is None for v in values):
        return None
    return float(np.mean([float(v) for v in values]))


def _pooled_table(
    live: list[WindowResult], models: list[str], weight_mode: str,
    cutoff: dt.date | None = None,
) -> dict[str, dict[str, float | None]]:
    """Pool test windows per (model, repetition), then average repetitions."""
    per_model: dict[str, dict[int, dict[str, list]]] = {}
    for r in live:
        pools = per_model.setdefault(r.model, {}).setdefault(
            r.repetition, {"y": [], "p": [], "d": [], "profit": []}
        )
        for k in range(len(r.sample_ids)):
            if cutoff is not None and dt.date.fromisoformat(r.dates[k]) < cutoff:
                continue
            pools["y"].append(r.labels[k])
            pools["p"].append(r.probabilities[k])
            pools["d"].append(r.trade_decisions[k])
            pools["profit"].append(r.profits[k])
    table: dict[str, dict[str, float | None]] = {}
    metric_names: list[str] = []
    values_by_model: dict[str, dict[str, float | None]] = {}
    for model in models:
        rep_rows = []
        for rep, pools in sorted(per_model.get(model, {}).items()):
            if not pools["y"]:
                continue
            probs = np.array(pools["p"])
            rep_rows.append(
                metrics_row(
                    np.array(pools["y"]),
                    probs,
                    (probs > 0.5).astype(int),
                    np.array(pools["d"]),
                    np.array(pools["profit"]),
                    weight_mode,
                )
            )
        if not rep_rows:
            continue
        merged = {
            name: _mean_or_none([row[name] for row in rep_rows]) for name in rep_rows[0]
        }
        values_by_model[model] = merged
        for name in rep_rows[0]:
            if name not in metric_names:
                metric_names.append(name)
    for name in metric_names:
        table[name] = {
            model: values_by_model[model].get(name) for model in values_by_model
        }
    return table


def aggregate(
    results: list[WindowResult],
    weight_mode: str = "absolute",
    since: dt.date | None = None,
) -> AggregateReport:
    """Build the full report from result rows (skips become a summary list)."""
    if not results:
        raise DataError("no results to aggregate")
    live = [r for r in results if not r.skipped]
    if not live:
        raise DataError("every result row is a skip record")
    models = sorted({r.model for r in results})
    iterations = sorted({r.iteration for r in live})
    skipped = [
        {
            "iteration": r.iteration,
            "model": r.model,
            "repetition": r.repetition,
            "reason": r.skip_reason,
        }
        for r in results
        if r.skipped
    ]

    # per-window metric means across repetitions, keyed (model, iteration)
    window_metrics: dict[tuple[str, int], dict[str, float | None]] = {}
    window_thresholds: dict[tuple[str, int], float | None] = {}
    by_window: dict[tuple[str, int], list[WindowResult]] = {}
    for r in live:
        by_window.setdefault((r.model, r.iteration), []).append(r)
    for key, rows in by_window.items():
        names = rows[0].metrics.keys()
        window_metrics[key] = {
            name: _mean_or_none([row.metrics.get(name) for row in rows])
            for name in names
        }
        window_thresholds[key] = _mean_or_none([row.threshold for row in rows])

    table = _pooled_table(live, models, weight_mode)

    competitors = [m for m in models if m != ALL_MODEL_ID]
    significance: dict[str, dict[str, dict[str, Any]]] = {}
    if ALL_MODEL_ID in models and competitors:
        m_comparisons = len(competitors)
        for model in competitors:
            per_metric: dict[str, dict[str, Any]] = {}
            for name in METRIC_TABLE_ROWS:
                xs: list[float] = []
                ys: list[float] = []
                for it in iterations:
                    mv = window_metrics.get((model, it), {}).get(name)
                    av = window_metrics.get((ALL_MODEL_ID, it), {}).get(name)
                    if mv is None or av is None:
                        continue
                    xs.append(mv)
                    ys.append(av)
                entry: dict[str, Any]
                try:
                    res = wilcoxon_signed_rank(np.array(xs) - np.array(ys))
                    entry = {
                        "statistic": res.statistic,
                        "p_value": res.p_value,
                        "p_adjusted": bonferroni(res.p_value, m_comparisons),
                        "n": res.n,
                        "method": res.method,
                    }
                except ValueError as exc:
                    entry = {
                        "statistic": None,
                        "p_value": None,
                        "p_adjusted": None,
                        "n": len(xs),
                        "method": f"unavailable: {exc}",
                    }
                per_metric[name] = entry
            significance[model] = per_metric

    per_window_profit: dict[str, list[dict[str, Any]]] = {}
    cumulative_profit: dict[str, list[dict[str, Any]]] = {}
    thresholds: dict[str, list[dict[str, Any]]] = {}
    for model in models:
        series = []
        cum_series = []
        thr_series = []
        running = 0.0
        for it in iterations:
            value = window_metrics.get((model, it), {}).get("tot_profit")
            series.append({"iteration": it, "value": value})
            if value is not None:
                running += value
            cum_series.append({"iteration": it, "value": running})
            thr_series.append(
                {"iteration": it, "value": window_thresholds.get((model, it))}
            )
        per_window_profit[model] = series
        cumulative_profit[model] = cum_series
        thresholds[model] = thr_series

    profit_distribution: dict[str, dict[str, list[float]]] = {}
    for r in live:
        dist = profit_distribution.setdefault(r.model, {})
        bucket = dist.setdefault(str(r.repetition), [])
        bucket.extend(
            p for p, d in zip(r.profits, r.trade_decisions) if d == 1
        )

    metric_boxes = [
        {
            "model": model,
            "metric": name,
            "iteration": it,
            "value": window_metrics.get((model, it), {}).get(name),
        }
        for model in models
        for name in METRIC_BOX_NAMES
        for it in iterations
        if (model, it) in window_metrics
    ]

    since_block = None
    if since is not None:
        since_block = {
            "cutoff": since.isoformat(),
            "table": _pooled_table(live, models, weight_mode, cutoff=since),
        }

    return AggregateReport(
        models=models,
        weight_mode=weight_mode,
        n_iterations=len(iterations),
        table=table,
        significance=significance,
        per_window_profit=per_window_profit,
        cumulative_profit=cumulative_profit,
        profit_distribution=profit_distribution,
        metric_boxes=metric_boxes,
        thresholds=thresholds,
        skipped=skipped,
        since=since_block,
    )


def render_table_csv(report: AggregateReport, path: str) -> None:
    """metric,<model...> rows in fixed order; missing cells stay empty."""
    models = [m for m in report.models if any(m in report.table.get(n, {}) for n in report.table)]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", *models])
        for name in METRIC_TABLE_ROWS:
            row = report.table.get(name, {})
            writer.writerow(
                [name] + ["" if row.get(m) is None else repr(row.get(m)) for m in models]
            )


def render_table_txt(report: AggregateReport, path: str) -> None:
    """Fixed-width text rendering of the metric table."""
    models = [m for m in report.models if any(m in report.table.get(n, {}) for n in report.table)]
    name_width = max(len(n) for n in METRIC_TABLE_ROWS)
    col_width = max(10, max((len(m) for m in models), default=10) + 2)
    lines = [
        "".join([f"{'metric':<{name_width}}"] + [f"{m:>{col_width}}" for m in models])
    ]
    for name in METRIC_TABLE_ROWS:
        row = report.table.get(name, {})
        cells = []
        for m in models:
            v = row.get(m)
            cells.append(f"{'-':>{col_width}}" if v is None else f"{v:>{col_width}.4f}")
        lines.append(f"{name:<{name_width}}" + "".join(cells))
    with open(path, "w") as handle:
        handle.write("\n".join(lines))
        handle.write("\n")


def emit_plot_data(report: AggregateReport, out_dir: str) -> dict[str, str]:
    """Write the four delimited series backing the figures; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "cumulative_profit": os.path.join(out_dir, "cumulative_profit.csv"),
        "per_window_profit": os.path.join(out_dir, "per_window_profit.csv"),
        "profit_distribution": os.path.join(out_dir, "profit_distribution.csv"),
        "metric_boxes": os.path.join(out_dir, "metric_boxes.csv"),
    }
    with open(paths["cumulative_profit"], "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "iteration", "cumulative_profit"])
        for model in report.models:
            for point in report.cumulative_profit.get(model, []):
                writer.writerow([model, point["iteration"], repr(point["value"])])
    with open(paths["per_window_profit"], "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "iteration", "tot_profit"])
        for model in report.models:
            for point in report.per_window_profit.get(model, []):
                v = point["value"]
                writer.writerow([model, point["iteration"], "" if v is None else repr(v)])
    with open(paths["profit_distribution"], "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "repetition", "profit"])
        for model in report.models:
            for rep in sorted(report.profit_distribution.get(model, {}), key=int):
                for value in report.profit_distribution[model][rep]:
                    writer.writerow([model, rep, repr(value)])
    with open(paths["metric_boxes"], "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "metric", "iteration", "value"])
        for row in report.metric_boxes:
            v = row["value"]
            writer.writerow(
                [row["model"], row["metric"], row["iteration"], "" if v is None else repr(v)]
            )
    return paths
