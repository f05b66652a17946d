import math

import numpy as np
import pytest

from oracles import classification_oracle, profit_oracle
from straddleml.metrics import (
    METRIC_TABLE_ROWS,
    CLASSIFICATION_NAMES,
    PROFIT_NAMES,
    classification_metrics,
    metrics_row,
    profit_metrics,
    weight_vector,
)

A = np.array


def close_or_both_none(a, b, tol=1e-12):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


class TestHandCases:
    Y = A([0.0, 0.0, 1.0, 1.0])
    P = A([0.1, 0.4, 0.35, 0.8])
    D = A([0, 0, 0, 1])

    def test_textbook_roc_auc(self):
        assert classification_metrics(self.Y, self.P, self.D)["roc_auc"] == pytest.approx(0.75)

    def test_textbook_average_precision(self):
        m = classification_metrics(self.Y, self.P, self.D)
        assert m["average_precision"] == pytest.approx(0.5 + 0.5 * (2.0 / 3.0))

    def test_confusion_based_metrics(self):
        m = classification_metrics(self.Y, self.P, self.D)
        assert m["accuracy"] == 0.75
        assert m["precision"] == 1.0
        assert m["recall"] == 0.5
        assert m["f1"] == pytest.approx(2 / 3)
        assert m["balanced_accuracy"] == 0.75

    def test_brier(self):
        m = classification_metrics(self.Y, self.P, self.D)
        expected = np.mean((self.P - self.Y) ** 2)
        assert m["brier_score"] == pytest.approx(expected)

    def test_tied_scores_group_together(self):
        y = A([1.0, 0.0, 1.0, 0.0])
        p = A([0.6, 0.6, 0.2, 0.2])
        m = classification_metrics(y, p, (p > 0.5).astype(int))
        assert m["roc_auc"] == pytest.approx(0.5)

    def test_log_loss_is_clipped(self):
        y = A([1.0, 0.0])
        p = A([0.0, 1.0])  # each maximally wrong
        m = classification_metrics(y, p, A([0, 1]))
        # the 1 - (1 - 1e-15) term picks up one rounding step, so compute it literally
        expected = -0.5 * (math.log(1e-15) + math.log(1.0 - (1.0 - 1e-15)))
        assert m["log_loss"] == pytest.approx(expected)


class TestConventions:
    def test_single_class_rank_metrics_are_none(self):
        y = A([1.0, 1.0, 1.0])
        m = classification_metrics(y, A([0.2, 0.5, 0.9]), A([0, 1, 1]))
        assert m["balanced_accuracy"] is None
        assert m["roc_auc"] is None
        assert m["accuracy"] == pytest.approx(2 / 3)

    def test_no_positives_kills_precision_recall_curves(self):
        y = A([0.0, 0.0])
        m = classification_metrics(y, A([0.2, 0.9]), A([0, 1]))
        assert m["average_precision"] is None
        assert m["prc_auc"] is None
        assert m["roc_auc"] is None

    def test_empty_prediction_denominators_give_zero(self):
        y = A([0.0, 1.0])
        m = classification_metrics(y, A([0.2, 0.3]), A([0, 0]))
        assert m["precision"] == 0.0
        assert m["recall"] == 0.0
        assert m["f1"] == 0.0

    def test_zero_weight_mass_gives_none(self):
        y = A([0.0, 1.0])
        m = classification_metrics(y, A([0.2, 0.8]), A([0, 1]), weights=A([0.0, 0.0]))
        assert m["accuracy"] is None
        assert m["log_loss"] is None
        assert m["brier_score"] is None
        assert m["roc_auc"] is None
        # zero-denominator confusion cells keep the 0.0 convention instead
        assert m["precision"] == 0.0

    def test_signed_weights_can_leave_the_unit_interval(self):
        y = A([1.0, 0.0])
        d = A([1, 1])
        w = weight_vector(A([-2.0, 1.0]), "signed")
        m = classification_metrics(y, A([0.9, 0.8]), d, weights=w)
        assert m["accuracy"] == pytest.approx(2.0)  # -2/-1: the distortion is intentional

    def test_always_trade_probabilities(self):
        y = A([1.0, 0.0, 1.0, 1.0])
        p = np.ones(4)
        d = np.ones(4, dtype=int)
        m = classification_metrics(y, p, d)
        frac_neg = 0.25
        assert m["recall"] == 1.0
        assert m["balanced_accuracy"] == 0.5
        assert m["roc_auc"] == 0.5
        assert m["average_precision"] == 0.75
        assert m["brier_score"] == pytest.approx(frac_neg)
        per_negative = -math.log(1.0 - (1.0 - 1e-15))
        assert m["log_loss"] == pytest.approx(frac_neg * per_negative, rel=1e-9)


class TestWeighted:
    def test_unit_weights_match_unweighted(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, 30).astype(float)
        p = rng.random(30)
        d = (p > 0.5).astype(int)
        plain = classification_metrics(y, p, d)
        unit = classification_metrics(y, p, d, weights=np.ones(30))
        for name in plain:
            assert close_or_both_none(plain[name], unit[name], tol=1e-12), name

    def test_integer_weights_match_replication(self):
        rng = np.random.default_rng(1)
        y = rng.integers(0, 2, 20).astype(float)
        p = np.round(rng.random(20), 2)  # induce ties
        d = (p > 0.4).astype(int)
        w = rng.integers(1, 4, 20)
        weighted = classification_metrics(y, p, d, weights=w.astype(float))
        yr = np.repeat(y, w)
        pr = np.repeat(p, w)
        dr = np.repeat(d, w)
        replicated = classification_metrics(yr, pr, dr)
        for name in weighted:
            assert close_or_both_none(weighted[name], replicated[name], tol=1e-9), name

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(25):
            n = int(rng.integers(2, 40))
            y = rng.integers(0, 2, n).astype(float)
            p = np.round(rng.random(n), 1)
            d = rng.integers(0, 2, n)
            w = np.abs(rng.normal(size=n))
            ours = classification_metrics(y, p, d, weights=w)
            ref = classification_oracle(y, p, d, w)
            for name in ref:
                assert close_or_both_none(ours[name], ref[name], tol=1e-9), (trial, name)


class TestProfitMetrics:
    def test_hand_case(self):
        m = profit_metrics(A([1, 0, 1]), A([2.0, -5.0, -3.0]))
        assert m["tot_profit"] == pytest.approx(-1.0)
        assert m["avg_profit"] == pytest.approx(-1.0 / 3.0)
        assert m["avg_trades"] == pytest.approx(2.0 / 3.0)
        assert m["avg_trading_profit"] == pytest.approx(-0.5)
        assert m["std_trading_profit"] == pytest.approx(2.5)  # population spread of {2, -3}
        assert m["downw_std_trading_profit"] == 0.0  # single loss

    def test_no_trades_keeps_totals_but_not_statistics(self):
        m = profit_metrics(A([0, 0]), A([5.0, -1.0]))
        assert m["tot_profit"] == 0.0
        assert m["avg_profit"] == 0.0
        assert m["avg_trades"] == 0.0
        assert m["avg_trading_profit"] is None
        assert m["std_trading_profit"] is None
        assert m["downw_std_trading_profit"] is None

    def test_no_losses_means_no_downside_spread(self):
        m = profit_metrics(A([1, 1]), A([5.0, 1.0]))
        assert m["downw_std_trading_profit"] is None
        assert m["std_trading_profit"] == pytest.approx(2.0)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(1, 40))
            d = rng.integers(0, 2, n)
            profits = rng.normal(size=n) * 10
            ours = profit_metrics(d, profits)
            ref = profit_oracle(d, profits)
            for name in ref:
                assert close_or_both_none(ours[name], ref[name], tol=1e-9), name


class TestWeightVector:
    def test_modes(self):
        profits = A([-2.0, 0.0, 3.0])
        assert weight_vector(profits, "absolute").tolist() == [2.0, 0.0, 3.0]
        assert weight_vector(profits, "signed").tolist() == [-2.0, 0.0, 3.0]
        with pytest.raises(ValueError):
            weight_vector(profits, "square")


class TestMetricsRow:
    def test_contains_every_table_row(self):
        rng = np.random.default_rng(4)
        y = rng.integers(0, 2, 25).astype(float)
        p = rng.random(25)
        profits = rng.normal(size=25)
        row = metrics_row(y, p, (p > 0.5).astype(int), (p > 0.3).astype(int), profits)
        assert set(METRIC_TABLE_ROWS) <= set(row)
        assert "prc_auc" in row and "prc_auc_weighted" in row

    def test_trade_and_class_decisions_are_distinct(self):
        y = A([1.0, 0.0, 1.0, 0.0])
        p = A([0.9, 0.4, 0.6, 0.1])
        class_d = (p > 0.5).astype(int)
        trade_d = (p > 0.35).astype(int)
        profits = A([4.0, -6.0, 3.0, -2.0])
        row = metrics_row(y, p, class_d, trade_d, profits)
        assert row["accuracy"] == 1.0  # class decisions: [1, 0, 1, 0]
        assert row["avg_trades"] == 0.75  # trade decisions: [1, 1, 1, 0]
        assert row["tot_profit"] == pytest.approx(1.0)

    def test_row_name_order_is_frozen(self):
        assert METRIC_TABLE_ROWS[:9] == CLASSIFICATION_NAMES
        assert METRIC_TABLE_ROWS[9:18] == tuple(f"{n}_weighted" for n in CLASSIFICATION_NAMES)
        assert METRIC_TABLE_ROWS[18:] == PROFIT_NAMES
