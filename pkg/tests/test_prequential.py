import datetime as dt

import numpy as np
import pytest

from oracles import threshold_oracle
from straddleml.calendars import fridays_between
from straddleml.classifiers import ClassifierSpec
from straddleml.errors import DataError
from straddleml.feature_builder import TradeSampleRecord
from straddleml.prequential import (
    ALL_MODEL_ID,
    THRESHOLD_GRID,
    assign_windows,
    make_splits,
    optimize_threshold,
    read_results,
    run_experiment,
    write_results,
)

D = dt.date


def rec(i, date, x, label, profit):
    return TradeSampleRecord(
        sample_id=i,
        trade_date=date,
        features={"x": float(x)},
        profit=float(profit),
        label=label,
    )


def weekly_records(start, end, labels=None):
    dates = fridays_between(start, end)
    records = []
    for i, date in enumerate(dates):
        label = (i % 2) if labels is None else labels[i]
        profit = 2.0 + 0.01 * i if label else -(1.0 + 0.01 * i)
        records.append(rec(i, date, x=label + 0.1 * (i % 5), label=label, profit=profit))
    return records


class TestMakeSplits:
    def test_monthly_step_boundaries(self):
        dates = fridays_between(D(2013, 6, 1), D(2014, 4, 30))
        bounds = make_splits(dates, (2014, 2), 1)
        assert len(bounds) == 3  # test months Feb, Mar, Apr
        first = bounds[0]
        assert first.train_end == D(2013, 12, 31)
        assert first.val_end == D(2014, 1, 31)
        assert first.test_end == D(2014, 2, 28)
        second = bounds[1]
        assert second.train_end == D(2014, 1, 31)
        assert second.val_end == D(2014, 2, 28)
        assert second.test_end == D(2014, 3, 31)

    def test_quarterly_step_boundaries(self):
        dates = fridays_between(D(2013, 1, 1), D(2014, 6, 30))
        bounds = make_splits(dates, (2014, 2), 3)
        first = bounds[0]
        assert first.train_end == D(2013, 10, 31)
        assert first.val_end == D(2014, 1, 31)
        assert first.test_end == D(2014, 4, 30)
        # next test block starts exactly one step later
        assert bounds[1].train_end == D(2014, 1, 31)
        assert bounds[1].test_end == D(2014, 7, 31)

    def test_iterations_stop_at_the_data_end(self):
        dates = fridays_between(D(2013, 6, 1), D(2014, 3, 7))
        bounds = make_splits(dates, (2014, 2), 1)
        # a March window exists (data reaches March 7), an April one does not
        assert len(bounds) == 2

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            make_splits([D(2014, 1, 3)], (2014, 2), 0)
        with pytest.raises(DataError):
            make_splits([], (2014, 2), 1)
        with pytest.raises(DataError, match="after the last sample"):
            make_splits([D(2013, 1, 4)], (2014, 2), 1)


class TestAssignWindows:
    def test_partition_is_disjoint_ordered_and_complete(self):
        records = weekly_records(D(2013, 6, 1), D(2014, 4, 30))
        bounds = make_splits([r.trade_date for r in records], (2014, 2), 1)
        windows = assign_windows(records, bounds)
        date_of = {r.sample_id: r.trade_date for r in records}
        for w in windows:
            train, val, test = set(w.train_ids), set(w.val_ids), set(w.test_ids)
            assert not (train & val) and not (train & test) and not (val & test)
            if w.train_ids and w.val_ids:
                assert max(date_of[s] for s in w.train_ids) < min(date_of[s] for s in w.val_ids)
            if w.val_ids and w.test_ids:
                assert max(date_of[s] for s in w.val_ids) < min(date_of[s] for s in w.test_ids)
            covered = train | val | test
            expected = {r.sample_id for r in records if r.trade_date <= w.bounds.test_end}
            assert covered == expected

    def test_training_set_absorbs_earlier_windows(self):
        records = weekly_records(D(2013, 6, 1), D(2014, 4, 30))
        bounds = make_splits([r.trade_date for r in records], (2014, 2), 1)
        windows = assign_windows(records, bounds)
        for prev, cur in zip(windows, windows[1:]):
            assert set(cur.train_ids) == set(prev.train_ids) | set(prev.val_ids)
            assert set(cur.val_ids) == set(prev.test_ids)


class TestOptimizeThreshold:
    def test_tie_takes_smallest_threshold(self):
        theta, value = optimize_threshold(
            np.array([0.95, 0.55, 0.15]), np.array([1.0, -2.0, 5.0])
        )
        assert theta == 0.0
        assert value == pytest.approx(4.0 / 3.0)

    def test_probability_equal_to_threshold_stays_out(self):
        theta, value = optimize_threshold(
            np.array([0.3, 0.9]), np.array([-5.0, 2.0])
        )
        assert theta == 0.3  # p = 0.3 is excluded at theta = 0.3
        assert value == pytest.approx(1.0)

    def test_per_trade_objective_changes_the_winner(self):
        probs = np.array([0.9, 0.6])
        profits = np.array([4.0, 2.0])
        assert optimize_threshold(probs, profits) == (0.0, 3.0)
        assert optimize_threshold(probs, profits, per_trade=True) == (0.6, 4.0)

    def test_empty_window(self):
        theta, value = optimize_threshold(np.array([]), np.array([]))
        assert theta == THRESHOLD_GRID[0]
        assert value == 0.0

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(5)
        for per_trade in (False, True):
            for _ in range(50):
                n = int(rng.integers(1, 30))
                probs = np.round(rng.random(n), 1)  # exercise the strict comparison
                profits = rng.normal(size=n) * 5
                ours = optimize_threshold(probs, profits, per_trade=per_trade)
                ref = threshold_oracle(probs, profits, THRESHOLD_GRID, per_trade)
                assert ours[0] == ref[0]
                assert ours[1] == pytest.approx(ref[1], abs=1e-12)


MODELS = {
    "LR": ClassifierSpec("logistic", {"max_iter": 50}),
    "RF": ClassifierSpec("random_forest", {"n_estimators": 3}),
}


class TestRunExperiment:
    def run(self, records, reps=2):
        return run_experiment(
            records,
            ["x"],
            MODELS,
            test_start=(2019, 3),
            delta_months=1,
            repetitions=reps,
            base_seed=7,
        )

    def test_row_cardinality_and_order(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        iterations, results = self.run(records)
        assert len(iterations) == 3  # Mar, Apr, May
        # per iteration: All once, LR and RF per repetition
        assert len(results) == 3 * (1 + 2 + 2)
        keys = [(r.iteration, r.model, r.repetition) for r in results]
        assert keys == sorted(keys)
        assert {r.model for r in results} == {"All", "LR", "RF"}

    def test_baseline_always_trades(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, results = self.run(records)
        all_rows = [r for r in results if r.model == ALL_MODEL_ID]
        assert len(all_rows) == 3
        for r in all_rows:
            assert r.repetition == 0
            assert all(p == 1.0 for p in r.probabilities)
            assert all(d == 1 for d in r.trade_decisions)
            assert r.metrics["recall"] == 1.0
            assert r.metrics["avg_trades"] == 1.0

    def test_deterministic_kinds_replicate_rows(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, results = self.run(records)
        lr = [r for r in results if r.model == "LR" and r.iteration == 0]
        assert len(lr) == 2
        assert lr[0].probabilities == lr[1].probabilities
        assert lr[0].metrics == lr[1].metrics
        assert [r.repetition for r in lr] == [0, 1]

    def test_forest_rows_are_seeded_per_repetition(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, results = self.run(records)
        rf = [r for r in results if r.model == "RF"]
        for r in rf:
            assert r.seed == [7, r.iteration, r.repetition]

    def test_thresholds_come_from_the_grid(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, results = self.run(records)
        for r in results:
            if not r.skipped:
                assert r.threshold in THRESHOLD_GRID

    def test_single_class_training_window_is_skipped(self):
        dates = fridays_between(D(2019, 1, 1), D(2019, 5, 31))
        # January is all wins; later months alternate
        labels = [1 if d.month == 1 else i % 2 for i, d in enumerate(dates)]
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31), labels=labels)
        _, results = self.run(records)
        first = [r for r in results if r.iteration == 0]
        skipped = [r for r in first if r.skipped]
        assert {r.model for r in skipped} == {"LR", "RF"}
        assert len(skipped) == 4  # both models, both repetitions
        assert all(r.skip_reason == "single-class training window" for r in skipped)
        assert [r for r in first if r.model == ALL_MODEL_ID and not r.skipped]

    def test_empty_test_window_skips_every_model(self):
        records = [
            r for r in weekly_records(D(2019, 1, 1), D(2019, 5, 31))
            if r.trade_date.month != 4
        ]
        _, results = self.run(records)
        april = [r for r in results if r.iteration == 1]
        assert all(r.skipped and r.skip_reason == "empty test window" for r in april)
        assert len([r for r in april if r.model == ALL_MODEL_ID]) == 1
        assert len([r for r in april if r.model == "LR"]) == 2

    def test_reserved_baseline_id_rejected(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        with pytest.raises(ValueError, match="reserved"):
            run_experiment(records, ["x"], {"All": MODELS["LR"]}, test_start=(2019, 3))

    def test_duplicate_sample_ids_rejected(self):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        records[1] = rec(0, records[1].trade_date, 1.0, 1, 2.0)
        with pytest.raises(DataError, match="duplicate"):
            run_experiment(records, ["x"], MODELS, test_start=(2019, 3))

    def test_runs_are_reproducible(self, tmp_path):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, first = self.run(records)
        _, second = self.run(records)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_results(first, str(a))
        write_results(second, str(b))
        assert a.read_bytes() == b.read_bytes()


class TestResultsFile:
    def test_round_trip_preserves_everything(self, tmp_path):
        records = weekly_records(D(2019, 1, 1), D(2019, 5, 31))
        _, results = run_experiment(
            records, ["x"], MODELS, test_start=(2019, 3), repetitions=2, base_seed=7
        )
        path = tmp_path / "results.jsonl"
        write_results(results, str(path))
        assert read_results(str(path)) == results

    def test_bad_json_line_reports_position(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text("not json\n")
        with pytest.raises(DataError, match="broken.jsonl:1"):
            read_results(str(path))

    def test_missing_field_reports_position(self, tmp_path):
        path = tmp_path / "partial.jsonl"
        path.write_text('{"iteration": 0}\n')
        with pytest.raises(DataError, match="partial.jsonl:1: missing field"):
            read_results(str(path))
