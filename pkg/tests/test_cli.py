import json
import os

import pytest

from straddleml import cli
from straddleml.config import (
    BUNDLED,
    FULL_ESTIMATORS,
    apply_overrides,
    config_hash,
    load_config,
    parse_config,
    resolve_config_path,
)
from straddleml.data_ingest import load_daily_bars, load_option_chain
from straddleml.errors import ConfigError
from straddleml.prequential import read_results


def minimal_raw(**overrides):
    raw = {
        "schema_version": 1,
        "name": "tiny",
        "data": {"kind": "synthetic", "start": "2019-01-01", "end": "2019-10-31",
                 "seed": 5, "strike_band": 0.02},
        "feature_names": ["putPrice", "callPrice", "vix0", "spx1", "daysToExpiry"],
        "split_frequency": 1,
        "test_start": "2019-07",
        "train_start": "2019-01-01",
        "tenor": 7,
        "iterations": 1,
        "models": [{"id": "LR", "kind": "logistic",
                    "hyperparameters": {"max_iter": 50}}],
        "base_seed": 1,
    }
    raw.update(overrides)
    return raw


@pytest.fixture(scope="module")
def small_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "tiny.json"
    path.write_text(json.dumps(minimal_raw()))
    return str(path)


@pytest.fixture(scope="module")
def small_run(small_config_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-run") / "artifacts"
    rc = cli.main(["run", "--config", small_config_path, "--out", str(out)])
    assert rc == 0
    return str(out)


class TestConfigParsing:
    def test_bundled_names_load(self):
        for name in BUNDLED:
            cfg = load_config(name)
            assert cfg.name == name
            assert cfg.data.kind == "synthetic"

    def test_bundled_shapes(self):
        deltas = {name: load_config(name).split_frequency for name in BUNDLED}
        assert deltas == {"exp-1.1": 1, "exp-1.2": 3, "exp-2.1": 3, "exp-2.2": 1}
        assert len(load_config("exp-1.1").feature_names) == 15
        assert len(load_config("exp-2.1").feature_names) == 20

    def test_resolve_rejects_missing_path(self):
        assert resolve_config_path("exp-1.1")[1] is True
        with pytest.raises(ConfigError, match="not found"):
            resolve_config_path("no-such-config.json")

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(str(path))

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(minimal_raw(surprise=1))

    def test_schema_version_checked(self):
        with pytest.raises(ConfigError, match="schema_version"):
            parse_config(minimal_raw(schema_version=2))

    def test_model_validation(self):
        with pytest.raises(ConfigError, match="reserved"):
            parse_config(minimal_raw(models=[{"id": "All", "kind": "logistic"}]))
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(minimal_raw(models=[
                {"id": "LR", "kind": "logistic"}, {"id": "LR", "kind": "knn"},
            ]))
        with pytest.raises(ConfigError, match="models\\[0\\]"):
            parse_config(minimal_raw(models=[{"id": "X", "kind": "perceptron"}]))

    def test_mode_validation(self):
        with pytest.raises(ConfigError, match="threshold_mode"):
            parse_config(minimal_raw(threshold_mode="greedy"))
        with pytest.raises(ConfigError, match="weight_mode"):
            parse_config(minimal_raw(weight_mode="quadratic"))

    def test_integer_fields_reject_bool(self):
        with pytest.raises(ConfigError, match="tenor"):
            parse_config(minimal_raw(tenor=True))

    def test_synth_knob_validation(self):
        data = {"kind": "synthetic", "start": "2019-01-01", "end": "2019-10-31",
                "tenors": []}
        with pytest.raises(ConfigError, match="tenors"):
            parse_config(minimal_raw(data=data))

    def test_bad_data_kind(self):
        with pytest.raises(ConfigError, match="data.kind"):
            parse_config(minimal_raw(data={"kind": "sql"}))

    def test_csv_paths_resolve_relative_to_the_config(self, tmp_path):
        raw = minimal_raw(data={"kind": "csv", "options": "o.csv",
                                "spx": "s.csv", "vix": "v.csv"})
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(raw))
        cfg = load_config(str(path))
        assert cfg.data.options_path == str(tmp_path / "o.csv")

    def test_csv_requires_all_three_paths(self):
        with pytest.raises(ConfigError, match="vix"):
            parse_config(minimal_raw(data={"kind": "csv", "options": "o.csv",
                                           "spx": "s.csv"}))


class TestOverrides:
    def test_seed_override_updates_raw_and_hash(self):
        cfg = parse_config(minimal_raw())
        before = config_hash(cfg)
        bumped = apply_overrides(cfg, seed=99)
        assert bumped.base_seed == 99
        assert bumped.raw["base_seed"] == 99
        assert config_hash(bumped) != before
        assert config_hash(parse_config(minimal_raw())) == before

    def test_model_subset(self):
        raw = minimal_raw(models=[
            {"id": "LR", "kind": "logistic"},
            {"id": "kNNe", "kind": "knn"},
        ])
        cfg = parse_config(raw)
        kept = apply_overrides(cfg, models=["kNNe"])
        assert [m.id for m in kept.models] == ["kNNe"]
        assert [m["id"] for m in kept.raw["models"]] == ["kNNe"]
        with pytest.raises(ConfigError, match="unknown id"):
            apply_overrides(cfg, models=["XGB"])

    def test_full_estimators_bumps_ensembles_only(self):
        raw = minimal_raw(models=[
            {"id": "RF", "kind": "random_forest", "hyperparameters": {"n_estimators": 5}},
            {"id": "GB", "kind": "gradient_boosting"},
            {"id": "LR", "kind": "logistic"},
        ])
        cfg = apply_overrides(parse_config(raw), full_estimators=True)
        sizes = {m.id: m.spec.hyperparameters.get("n_estimators") for m in cfg.models}
        assert sizes["RF"] == FULL_ESTIMATORS
        assert sizes["GB"] == FULL_ESTIMATORS
        assert "n_estimators" not in cfg.models[2].spec.hyperparameters
        assert cfg.raw["full_estimators"] is True


class TestMarking:
    def test_strictly_above_one_half(self):
        assert cli.trade_marking(0.50001) == "trade"
        assert cli.trade_marking(0.5) == "dont_trade"
        assert cli.trade_marking(0.49) == "dont_trade"


class TestExitCodes:
    def test_config_error_is_2(self, capsys):
        assert cli.main(["run", "--config", "missing.json", "--out", "/tmp/x"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_timeline_without_out_dir_is_2(self, small_config_path, capsys):
        assert cli.main(["timeline", "--config", small_config_path]) == 2
        capsys.readouterr()

    def test_timeline_without_artifacts_is_3(self, small_config_path, tmp_path, capsys):
        rc = cli.main(["timeline", "--config", small_config_path, "--out", str(tmp_path)])
        assert rc == 3
        assert "data error" in capsys.readouterr().err

    def test_unwritable_out_dir_is_4(self, small_config_path, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        rc = cli.main(["run", "--config", small_config_path, "--out", str(blocker)])
        assert rc == 4
        capsys.readouterr()


class TestDryRun:
    def test_prints_the_plan_and_writes_nothing(self, small_config_path, tmp_path, capsys):
        out = tmp_path / "never"
        rc = cli.main(["dry-run", "--config", small_config_path, "--out", str(out)])
        assert rc == 0
        captured = capsys.readouterr().out
        assert "config: tiny" in captured
        assert "train_end" in captured
        assert "+All baseline" in captured
        assert not out.exists()

    def test_run_dash_dash_dry_run_is_the_same(self, small_config_path, capsys):
        rc = cli.main(["run", "--config", small_config_path, "--dry-run"])
        assert rc == 0
        assert "train_end" in capsys.readouterr().out


class TestSynthVerb:
    def test_writes_loadable_csvs(self, small_config_path, tmp_path, capsys):
        rc = cli.main(["synth", "--config", small_config_path, "--out", str(tmp_path)])
        assert rc == 0
        capsys.readouterr()
        quotes = load_option_chain(str(tmp_path / "options.csv"))
        assert quotes
        assert load_daily_bars(str(tmp_path / "spx.csv"))
        assert load_daily_bars(str(tmp_path / "vix.csv"))


class TestRunArtifacts:
    EXPECTED = [
        "cumulative_profit.csv",
        "figures/cumulative_profit.png",
        "figures/metric_boxes.png",
        "figures/per_window_profit.png",
        "figures/profit_box.png",
        "figures/profit_violin.png",
        "metric_boxes.csv",
        "metrics_table.csv",
        "metrics_table.txt",
        "per_window_profit.csv",
        "profit_distribution.csv",
        "report.json",
        "results.jsonl",
    ]

    def test_all_artifacts_exist(self, small_run):
        for rel in self.EXPECTED + ["run_manifest.json"]:
            assert os.path.exists(os.path.join(small_run, rel)), rel

    def test_manifest_contents(self, small_run, small_config_path):
        with open(os.path.join(small_run, "run_manifest.json")) as handle:
            manifest = json.load(handle)
        assert manifest["artifacts"] == self.EXPECTED
        assert manifest["config_sha256"] == config_hash(load_config(small_config_path))
        assert manifest["models"] == ["All", "LR"]
        assert manifest["n_iterations"] == 4
        assert manifest["n_samples"] > 30
        assert set(manifest["versions"]) == {"straddleml", "python", "numpy", "matplotlib"}

    def test_report_is_valid_json(self, small_run):
        with open(os.path.join(small_run, "report.json")) as handle:
            report = json.load(handle)
        assert report["models"] == ["All", "LR"]
        assert report["n_iterations"] == 4


class TestTimeline:
    def test_markings_follow_the_stored_probabilities(self, small_run,
                                                      small_config_path, capsys):
        rc = cli.main(["timeline", "--config", small_config_path,
                       "--out", small_run, "--models", "LR"])
        assert rc == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "model: LR"
        assert lines[1].split() == ["week", "date", "probability", "marking"]
        rows = lines[2:]

        results = read_results(os.path.join(small_run, "results.jsonl"))
        expected = []
        for r in sorted(results, key=lambda r: r.iteration):
            if r.model != "LR" or r.repetition != 0 or r.skipped:
                continue
            expected.extend(zip(r.dates, r.probabilities))
        expected.sort()
        assert len(rows) == len(expected)
        for i, (row, (date, prob)) in enumerate(zip(rows, expected), start=1):
            parts = row.split()
            assert parts[0] == f"W{i}"
            assert parts[1] == date
            assert parts[2] == f"{prob:.5f}"
            assert parts[3] == ("trade" if prob > 0.5 else "dont_trade")

    def test_rejects_two_models(self, small_run, small_config_path, capsys):
        rc = cli.main(["timeline", "--config", small_config_path,
                       "--out", small_run, "--models", "LR,GB"])
        assert rc == 2
        capsys.readouterr()

    def test_unknown_model_is_a_config_error(self, small_run, small_config_path, capsys):
        rc = cli.main(["timeline", "--config", small_config_path,
                       "--out", small_run, "--models", "GB"])
        assert rc == 2
        capsys.readouterr()
