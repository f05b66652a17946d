"""Walk-forward evaluation: grow train, tune on validation, score on test.

Windows are cut at calendar month ends.  With a step of d months, iteration
i tests the d months starting at test_start + i*d, validates on the d months
directly before, and trains on everything earlier.  The step equals the test
width, so consecutive test windows tile the timeline without overlap and the
training set only ever grows.

Per (iteration, model, repetition) one result row is produced.  The trading
threshold is tuned on the validation window by exhaustive scan over a fixed
grid, maximizing average profit (over all validation samples by default),
ties resolving to the smallest threshold.  Deterministic model kinds are
fitted once per window and their row is replicated across repetitions; only
the forest consumes the seed, derived as (base_seed, iteration, repetition).
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .calendars import add_months, month_end
from .classifiers import ClassifierSpec, decide, fit
from .classifiers.base import USES_SEED
from .errors import DataError
from .feature_builder import TradeSampleRecord, feature_matrix, labels_of, profits_of
from .metrics import metrics_row

log = logging.getLogger(__name__)

THRESHOLD_GRID = tuple(round(0.1 * i, 1) for i in range(10))
ALL_MODEL_ID = "All"


@dataclass(frozen=True)
class SplitBounds:
    """Inclusive month-end boundaries of one walk-forward iteration."""

    index: int
    train_end: dt.date
    val_end: dt.date
    test_end: dt.date


@dataclass(frozen=True)
class PrequentialIteration:
    bounds: SplitBounds
    train_ids: tuple[int, ...]
    val_ids: tuple[int, ...]
    test_ids: tuple[int, ...]


@dataclass(frozen=True)
class WindowResult:
    """Scored output of one model on one test window under one repetition."""

    iteration: int
    model: str
    repetition: int
    seed: list[int] | None
    threshold: float | None
    sample_ids: tuple[int, ...]
    dates: tuple[str, ...]
    labels: tuple[int, ...]
    profits: tuple[float, ...]
    probabilities: tuple[float, ...]
    trade_decisions: tuple[int, ...]
    metrics: dict[str, float | None] = field(default_factory=dict)
    skipped: bool = False
    skip_reason: str | None = None


def make_splits(
    sample_dates: list[dt.date],
    test_start: tuple[int, int],
    delta_months: int,
) -> list[SplitBounds]:
    """Boundaries for every iteration whose test window can contain data."""
    if delta_months < 1:
        raise ValueError("delta_months must be positive")
    if not sample_dates:
        raise DataError("no samples to split")
    last = max(sample_dates)
    bounds: list[SplitBounds] = []
    i = 0
    while True:
        ty, tm = add_months(test_start[0], test_start[1], i * delta_months)
        if dt.date(ty, tm, 1) > last:
            break
        vy, vm = add_months(ty, tm, -delta_months)
        bounds.append(
            SplitBounds(
                index=i,
                train_end=month_end(*add_months(vy, vm, -1)),
                val_end=month_end(*add_months(ty, tm, -1)),
                test_end=month_end(*add_months(ty, tm, delta_months - 1)),
            )
        )
        i += 1
    if not bounds:
        raise DataError(
            f"test start {test_start[0]}-{test_start[1]:02d} is after the last sample"
        )
    return bounds


def assign_windows(
    records: list[TradeSampleRecord], bounds: list[SplitBounds]
) -> list[PrequentialIteration]:
    """Partition samples into train/val/test id tuples per iteration."""
    iterations = []
    for b in bounds:
        train: list[int] = []
        val: list[int] = []
        test: list[int] = []
        for r in records:
            if r.trade_date <= b.train_end:
                train.append(r.sample_id)
            elif r.trade_date <= b.val_end:
                val.append(r.sample_id)
            elif r.trade_date <= b.test_end:
                test.append(r.sample_id)
        iterations.append(
            PrequentialIteration(
                bounds=b,
                train_ids=tuple(train),
                val_ids=tuple(val),
                test_ids=tuple(test),
            )
        )
    return iterations


def optimize_threshold(
    probs: np.ndarray,
    profits: np.ndarray,
    grid: tuple[float, ...] = THRESHOLD_GRID,
    per_trade: bool = False,
) -> tuple[float, float]:
    """Grid threshold maximizing validation profit; first grid value on ties.

    Default objective is total profit of taken trades divided by the number
    of validation samples; per_trade divides by the trade count instead
    (windows where a threshold takes no trades score 0 under both).
    """
    probs = np.asarray(probs, dtype=float)
    profits = np.asarray(profits, dtype=float)
    best_theta = grid[0]
    best_value = -np.inf
    for theta in grid:
        taken = probs > theta
        n_taken = int(taken.sum())
        if per_trade:
            value = float(profits[taken].sum() / n_taken) if n_taken else 0.0
        else:
            value = float(profits[taken].sum() / len(probs)) if len(probs) else 0.0
        if value > best_value:
            best_value = value
            best_theta = theta
    return best_theta, best_value


def _skip(iteration: int, model: str, repetition: int, reason: str) -> WindowResult:
    return WindowResult(
        iteration=iteration,
        model=model,
        repetition=repetition,
        seed=None,
        threshold=None,
        sample_ids=(),
        dates=(),
        labels=(),
        profits=(),
        probabilities=(),
        trade_decisions=(),
        metrics={},
        skipped=True,
        skip_reason=reason,
    )


def run_experiment(
    records: list[TradeSampleRecord],
    feature_names: list[str],
    model_specs: dict[str, ClassifierSpec],
    test_start: tuple[int, int],
    delta_months: int = 1,
    repetitions: int = 1,
    base_seed: int = 0,
    threshold_grid: tuple[float, ...] = THRESHOLD_GRID,
    threshold_per_trade: bool = False,
    weight_mode: str = "absolute",
    epochs: int = 1,
) -> tuple[list[PrequentialIteration], list[WindowResult]]:
    """Run the full walk-forward over every model and repetition.

    model_specs maps model id to its classifier spec; a constant
    probability-one baseline under ALL_MODEL_ID is always added.  Rows come
    out ordered by (iteration, model id, repetition).  Windows that cannot
    be scored produce a skip row carrying the reason instead of metrics.
    """
    if ALL_MODEL_ID in model_specs:
        raise ValueError(f"{ALL_MODEL_ID!r} is reserved for the baseline")
    by_id = {r.sample_id: r for r in records}
    if len(by_id) != len(records):
        raise DataError("duplicate sample ids")
    X_all = feature_matrix(records, feature_names)
    y_all = labels_of(records)
    profit_all = profits_of(records)
    row_of = {r.sample_id: i for i, r in enumerate(records)}

    bounds = make_splits([r.trade_date for r in records], test_start, delta_months)
    iterations = assign_windows(records, bounds)
    ordered_ids = sorted([*model_specs, ALL_MODEL_ID])
    warm: dict[str, Any] = {}
    results: list[WindowResult] = []

    def rows(ids: tuple[int, ...]) -> np.ndarray:
        return np.array([row_of[s] for s in ids], dtype=int)

    for it in iterations:
        tr, va, te = rows(it.train_ids), rows(it.val_ids), rows(it.test_ids)
        test_dates = tuple(by_id[s].trade_date.isoformat() for s in it.test_ids)
        empty_reason = None
        if len(te) == 0:
            empty_reason = "empty test window"
        for model_id in ordered_ids:
            if empty_reason is not None:
                n_skip = 1 if model_id == ALL_MODEL_ID else repetitions
                for rep in range(n_skip):
                    results.append(_skip(it.bounds.index, model_id, rep, empty_reason))
                continue
            if model_id == ALL_MODEL_ID:
                results.append(
                    _score_window(
                        it,
                        model_id,
                        0,
                        None,
                        np.ones(len(va)),
                        np.ones(len(te)),
                        y_all[te],
                        profit_all[va],
                        profit_all[te],
                        it.test_ids,
                        test_dates,
                        threshold_grid,
                        threshold_per_trade,
                        weight_mode,
                    )
                )
                continue
            spec = model_specs[model_id]
            reason = None
            if len(tr) < 2:
                reason = "fewer than 2 training samples"
            elif len(np.unique(y_all[tr])) < 2:
                reason = "single-class training window"
            elif len(va) == 0:
                reason = "empty validation window"
            if reason is not None:
                for rep in range(repetitions):
                    results.append(_skip(it.bounds.index, model_id, rep, reason))
                continue
            reps = range(repetitions)
            if spec.kind not in USES_SEED:
                fitted = _fit_model(spec, X_all[tr], y_all[tr], warm, model_id, epochs)
                val_p = fitted.predict_proba(X_all[va])
                test_p = fitted.predict_proba(X_all[te])
                base = _score_window(
                    it,
                    model_id,
                    0,
                    None,
                    val_p,
                    test_p,
                    y_all[te],
                    profit_all[va],
                    profit_all[te],
                    it.test_ids,
                    test_dates,
                    threshold_grid,
                    threshold_per_trade,
                    weight_mode,
                )
                for rep in reps:
                    results.append(
                        base if rep == 0 else dataclasses.replace(base, repetition=rep)
                    )
            else:
                for rep in reps:
                    seed = [base_seed, it.bounds.index, rep]
                    seeded = ClassifierSpec(
                        kind=spec.kind,
                        hyperparameters=spec.hyperparameters,
                        seed=tuple(seed),
                    )
                    fitted = fit(seeded, X_all[tr], y_all[tr])
                    results.append(
                        _score_window(
                            it,
                            model_id,
                            rep,
                            seed,
                            fitted.predict_proba(X_all[va]),
                            fitted.predict_proba(X_all[te]),
                            y_all[te],
                            profit_all[va],
                            profit_all[te],
                            it.test_ids,
                            test_dates,
                            threshold_grid,
                            threshold_per_trade,
                            weight_mode,
                        )
                    )
    return iterations, results


def _fit_model(
    spec: ClassifierSpec,
    X: np.ndarray,
    y: np.ndarray,
    warm: dict[str, Any],
    model_id: str,
    epochs: int,
) -> Any:
    if spec.kind != "logistic":
        return fit(spec, X, y)
    # the optimizer runs in epoch segments, each warm started from the last,
    # and carries coefficients across windows as the training set grows
    fitted = warm.get(model_id)
    for _ in range(max(1, epochs)):
        fitted = fit(spec, X, y, warm_start=fitted)
        if fitted.converged:
            break
    warm[model_id] = fitted
    return fitted


def _score_window(
    it: PrequentialIteration,
    model_id: str,
    repetition: int,
    seed: list[int] | None,
    val_probs: np.ndarray,
    test_probs: np.ndarray,
    test_labels: np.ndarray,
    val_profits: np.ndarray,
    test_profits: np.ndarray,
    test_ids: tuple[int, ...],
    test_dates: tuple[str, ...],
    threshold_grid: tuple[float, ...],
    threshold_per_trade: bool,
    weight_mode: str,
) -> WindowResult:
    if len(val_probs):
        theta, _ = optimize_threshold(
            val_probs, val_profits, grid=threshold_grid, per_trade=threshold_per_trade
        )
    else:
        theta = threshold_grid[0]
    trade = decide(test_probs, theta)
    class_pred = decide(test_probs, 0.5)
    row = metrics_row(
        test_labels, test_probs, class_pred, trade, test_profits, weight_mode
    )
    return WindowResult(
        iteration=it.bounds.index,
        model=model_id,
        repetition=repetition,
        seed=seed,
        threshold=theta,
        sample_ids=test_ids,
        dates=test_dates,
        labels=tuple(int(v) for v in test_labels),
        profits=tuple(float(v) for v in test_profits),
        probabilities=tuple(float(v) for v in test_probs),
        trade_decisions=tuple(int(v) for v in trade),
        metrics=row,
    )


def write_results(results: list[WindowResult], path: str) -> None:
    """Stream results as one JSON object per line, keys sorted."""
    with open(path, "w") as handle:
        for r in results:
            obj = {
                "iteration": r.iteration,
                "model": r.model,
                "repetition": r.repetition,
                "seed": r.seed,
                "threshold": r.threshold,
                "sample_ids": list(r.sample_ids),
                "dates": list(r.dates),
                "labels": list(r.labels),
                "profits": list(r.profits),
                "probabilities": list(r.probabilities),
                "trade_decisions": list(r.trade_decisions),
                "metrics": r.metrics,
                "skipped": r.skipped,
                "skip_reason": r.skip_reason,
            }
            handle.write(json.dumps(obj, sort_keys=True))
            handle.write("\n")


def read_results(path: str) -> list[WindowResult]:
    results: list[WindowResult] = []
    with open(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            try:
                results.append(
                    WindowResult(
                        iteration=obj["iteration"],
                        model=obj["model"],
                        repetition=obj["repetition"],
                        seed=obj["seed"],
                        threshold=obj["threshold"],
                        sample_ids=tuple(obj["sample_ids"]),
                        dates=tuple(obj["dates"]),
                        labels=tuple(obj["labels"]),
                        profits=tuple(obj["profits"]),
                        probabilities=tuple(obj["probabilities"]),
                        trade_decisions=tuple(obj["trade_decisions"]),
                        metrics=obj["metrics"],
                        skipped=obj["skipped"],
                        skip_reason=obj["skip_reason"],
                    )
                )
            except KeyError as exc:
                raise DataError(f"{path}:{line_no}: missing field {exc}") from None
    return results
