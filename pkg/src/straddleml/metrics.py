"""Classification and trading-profit metrics with optional sample weights.

Conventions shared by every metric:

  * A metric that is undefined on the given sample (single-class labels,
    no trades, zero weight mass in a denominator) is None, never 0.
  * Weighted variants apply the weight vector inside every sum, including
    the cumulative sums behind ranking curves.  With signed weights the
    usual [0, 1] bounds no longer hold; that distortion is intentional and
    surfaces in the weighted columns.
  * Ranking curves treat a sample as predicted positive when its score is
    greater than or equal to the threshold, thresholds descending over the
    distinct scores.

Probability clipping for log loss uses [1e-15, 1 - 1e-15].
"""

from __future__ import annotations

import numpy as np

LOG_LOSS_CLIP = 1e-15

CLASSIFICATION_NAMES = (
    "accuracy",
    "balanced_accuracy",
    "average_precision",
    "brier_score",
    "f1",
    "log_loss",
    "precision",
    "recall",
    "roc_auc",
)

PROFIT_NAMES = (
    "avg_profit",
    "tot_profit",
    "avg_trading_profit",
    "std_trading_profit",
    "downw_std_trading_profit",
    "avg_trades",
)

# row order used by the rendered metric tables
METRIC_TABLE_ROWS = (
    CLASSIFICATION_NAMES
    + tuple(f"{name}_weighted" for name in CLASSIFICATION_NAMES)
    + PROFIT_NAMES
)


def _safe_div(num: float, den: float) -> float | None:
    return None if den == 0.0 else num / den


def _trapezoid(x: np.ndarray, y: np.ndarray) -> float:
    return float(((x[1:] - x[:-1]) * (y[1:] + y[:-1]) * 0.5).sum())


def _ranked_groups(
    y: np.ndarray, probs: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Cumulative weighted TP/FP at each distinct score, descending."""
    order = np.argsort(-probs, kind="stable")
    ps = probs[order]
    tp_steps = (w * y)[order]
    fp_steps = (w * (1.0 - y))[order]
    # last index of each tied-score group
    last = np.nonzero(np.append(ps[1:] != ps[:-1], True))[0]
    ctp = np.cumsum(tp_steps)[last]
    cfp = np.cumsum(fp_steps)[last]
    return ctp, cfp, float(ctp[-1]), float(cfp[-1])


def weight_vector(profits: np.ndarray, mode: str = "absolute") -> np.ndarray:
    """Per-sample weights derived from realized profit."""
    profits = np.asarray(profits, dtype=float)
    if mode == "absolute":
        return np.abs(profits)
    if mode == "signed":
        return profits.copy()
    raise ValueError(f"unknown weight mode {mode!r}")


def classification_metrics(
    y_true: np.ndarray,
    probs: np.ndarray,
    decisions: np.ndarray,
    weights: np.ndarray | None = None,
) -> dict[str, float | None]:
    """The nine threshold/ranking metrics plus prc_auc for one sample set."""
    y = np.asarray(y_true, dtype=float)
    p = np.asarray(probs, dtype=float)
    d = np.asarray(decisions, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)

    total_w = float(w.sum())
    pos_present = bool((y == 1).any())
    neg_present = bool((y == 0).any())

    out: dict[str, float | None] = {}
    out["accuracy"] = _safe_div(float((w * (d == y)).sum()), total_w)

    if pos_present and neg_present:
        rec1 = _safe_div(float((w * ((y == 1) & (d == 1))).sum()), float((w * (y == 1)).sum()))
        rec0 = _safe_div(float((w * ((y == 0) & (d == 0))).sum()), float((w * (y == 0)).sum()))
        out["balanced_accuracy"] = (
            None if rec1 is None or rec0 is None else 0.5 * (rec1 + rec0)
        )
    else:
        out["balanced_accuracy"] = None

    clipped = np.clip(p, LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    out["log_loss"] = _safe_div(
        float(-(w * (y * np.log(clipped) + (1.0 - y) * np.log(1.0 - clipped))).sum()),
        total_w,
    )
    out["brier_score"] = _safe_div(float((w * (p - y) ** 2).sum()), total_w)

    tp = float((w * ((y == 1) & (d == 1))).sum())
    fp = float((w * ((y == 0) & (d == 1))).sum())
    fn = float((w * ((y == 1) & (d == 0))).sum())
    precision = tp / (tp + fp) if (tp + fp) != 0.0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) != 0.0 else 0.0
    out["precision"] = precision
    out["recall"] = recall
    out["f1"] = (
        2.0 * precision * recall / (precision + recall)
        if (precision + recall) != 0.0
        else 0.0
    )

    if pos_present and neg_present:
        ctp, cfp, P, N = _ranked_groups(y, p, w)
        if P == 0.0 or N == 0.0:
            out["roc_auc"] = None
        else:
            tpr = np.concatenate([[0.0], ctp / P])
            fpr = np.concatenate([[0.0], cfp / N])
            out["roc_auc"] = _trapezoid(fpr, tpr)
    else:
        out["roc_auc"] = None

    if pos_present:
        ctp, cfp, P, _ = _ranked_groups(y, p, w)
        if P == 0.0:
            out["average_precision"] = None
            out["prc_auc"] = None
        else:
            denom = ctp + cfp
            with np.errstate(invalid="ignore", divide="ignore"):
                prec_curve = np.where(denom != 0.0, ctp / denom, 0.0)
            rec_curve = ctp / P
            prev_rec = np.concatenate([[0.0], rec_curve[:-1]])
            out["average_precision"] = float(((rec_curve - prev_rec) * prec_curve).sum())
            rx = np.concatenate([[0.0], rec_curve])
            py = np.concatenate([[prec_curve[0]], prec_curve])
            out["prc_auc"] = _trapezoid(rx, py)
    else:
        out["average_precision"] = None
        out["prc_auc"] = None

    return out


def profit_metrics(decisions: np.ndarray, profits: np.ndarray) -> dict[str, float | None]:
    """Realized trading statistics given 0/1 trade decisions and per-sample profit."""
    d = np.asarray(decisions, dtype=float)
    prof = np.asarray(profits, dtype=float)
    n = len(d)
    taken = prof[d == 1]
    out: dict[str, float | None] = {}
    out["tot_profit"] = float((d * prof).sum())
    out["avg_profit"] = out["tot_profit"] / n if n else None
    out["avg_trades"] = float(d.mean()) if n else None
    if len(taken) == 0:
        out["avg_trading_profit"] = None
        out["std_trading_profit"] = None
    else:
        out["avg_trading_profit"] = float(taken.mean())
        out["std_trading_profit"] = float(taken.std())
    losses = taken[taken < 0.0]
    out["downw_std_trading_profit"] = float(losses.std()) if len(losses) else None
    return out


def metrics_row(
    y_true: np.ndarray,
    probs: np.ndarray,
    class_decisions: np.ndarray,
    trade_decisions: np.ndarray,
    profits: np.ndarray,
    weight_mode: str = "absolute",
) -> dict[str, float | None]:
    """Assemble the full metric dictionary for one evaluation window.

    Classification metrics are computed twice: unweighted, then with
    profit-derived weights under the chosen mode.  Profit metrics use the
    trade decisions, which generally come from a tuned threshold rather
    than the plain 0.5 rule behind class_decisions.
    """
    row: dict[str, float | None] = {}
    plain = classification_metrics(y_true, probs, class_decisions)
    weights = weight_vector(profits, weight_mode)
    weighted = classification_metrics(y_true, probs, class_decisions, weights=weights)
    for name in CLASSIFICATION_NAMES + ("prc_auc",):
        row[name] = plain[name]
        row[f"{name}_weighted"] = weighted[name]
    row.update(profit_metrics(trade_decisions, profits))
    return row
