"""Command line front end.

Verbs:
    run       execute a configured experiment and write all artifacts
    dry-run   resolve data, samples, and splits; print the plan, fit nothing
    timeline  weekly probability/marking table from a completed run
    synth     emit the synthetic market CSVs for a config

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import platform
import sys

import matplotlib
import numpy as np

from . import __version__
from .calendars import parse_date
from .config import ExperimentConfig, apply_overrides, config_hash, load_config
from .data_ingest import align_calendar, load_daily_bars, load_option_chain
from .errors import ConfigError, DataError
from .feature_builder import build_dataset, weekly_schedule
from .figures import render_all
from .prequential import (
    assign_windows,
    make_splits,
    read_results,
    run_experiment,
    write_results,
)
from .stats_report import aggregate, emit_plot_data, render_table_csv, render_table_txt
from .synth_data import generate_market, write_market_csvs

log = logging.getLogger(__name__)

TRADE_MARK = "trade"
NO_TRADE_MARK = "dont_trade"


def trade_marking(probability: float, threshold: float = 0.5) -> str:
    """Weekly table marking: trade exactly when probability exceeds 0.5."""
    return TRADE_MARK if probability > threshold else NO_TRADE_MARK


def _acquire_dataset(cfg: ExperimentConfig):
    if cfg.data.kind == "synthetic":
        return generate_market(cfg.data.synth)
    quotes = load_option_chain(cfg.data.options_path)
    spx = load_daily_bars(cfg.data.spx_path)
    vix = load_daily_bars(cfg.data.vix_path)
    return align_calendar(quotes, spx, vix)


def _build_samples(cfg: ExperimentConfig, dataset):
    schedule = weekly_schedule(dataset, cfg.train_start)
    if not schedule:
        raise DataError("no Fridays with data between train_start and the data end")
    return build_dataset(dataset, schedule, cfg.tenor, list(cfg.feature_names))


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_with_overrides(args)
    out_dir = args.out or cfg.out_dir
    if out_dir is None and not args.dry_run:
        raise ConfigError("no output directory: pass --out or set out_dir in the config")
    dataset = _acquire_dataset(cfg)
    records = _build_samples(cfg, dataset)
    if args.dry_run:
        _print_plan(cfg, records)
        return 0

    log.info("running %s: %d samples, %d model(s)", cfg.name, len(records),
             len(cfg.models))
    iterations, results = run_experiment(
        records,
        list(cfg.feature_names),
        cfg.model_specs(),
        test_start=cfg.test_start,
        delta_months=cfg.split_frequency,
        repetitions=cfg.iterations,
        base_seed=cfg.base_seed,
        threshold_per_trade=cfg.threshold_mode == "per_trade",
        weight_mode=cfg.weight_mode,
        epochs=cfg.epochs,
    )
    report = aggregate(results, weight_mode=cfg.weight_mode, since=cfg.since)

    os.makedirs(out_dir, exist_ok=True)
    artifacts = []

    results_path = os.path.join(out_dir, "results.jsonl")
    write_results(results, results_path)
    artifacts.append("results.jsonl")

    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w") as handle:
        json.dump(report.to_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")
    artifacts.append("report.json")

    render_table_csv(report, os.path.join(out_dir, "metrics_table.csv"))
    render_table_txt(report, os.path.join(out_dir, "metrics_table.txt"))
    artifacts += ["metrics_table.csv", "metrics_table.txt"]

    plot_paths = emit_plot_data(report, out_dir)
    artifacts += [os.path.basename(p) for p in plot_paths.values()]

    figure_paths = render_all(report, os.path.join(out_dir, "figures"))
    artifacts += [os.path.join("figures", os.path.basename(p)) for p in figure_paths]

    manifest = {
        "config": cfg.raw,
        "config_sha256": config_hash(cfg),
        "versions": {
            "straddleml": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "matplotlib": matplotlib.__version__,
        },
        "n_samples": len(records),
        "n_iterations": len(iterations),
        "models": sorted({r.model for r in results}),
        "artifacts": sorted(artifacts),
    }
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2)
        handle.write("\n")

    print(f"run complete: {len(records)} samples, {len(iterations)} iterations")
    print(f"artifacts in {out_dir}")
    return 0


def _print_plan(cfg: ExperimentConfig, records) -> None:
    bounds = make_splits(
        [r.trade_date for r in records], cfg.test_start, cfg.split_frequency
    )
    windows = assign_windows(records, bounds)
    print(f"config: {cfg.name}")
    print(f"samples: {len(records)} ({records[0].trade_date} .. {records[-1].trade_date})")
    print(f"models: {', '.join(m.id for m in cfg.models)} (+All baseline)")
    print(f"repetitions: {cfg.iterations}; step: {cfg.split_frequency} month(s)")
    print("iteration  train_end   val_end     test_end    n_train  n_val  n_test")
    for w in windows:
        b = w.bounds
        print(
            f"{b.index:>9}  {b.train_end}  {b.val_end}  {b.test_end}  "
            f"{len(w.train_ids):>7}  {len(w.val_ids):>5}  {len(w.test_ids):>6}"
        )


def _cmd_timeline(args: argparse.Namespace) -> int:
    cfg = _load_with_overrides(args)
    out_dir = args.out or cfg.out_dir
    if out_dir is None:
        raise ConfigError("timeline needs the run directory: pass --out")
    results_path = os.path.join(out_dir, "results.jsonl")
    if not os.path.exists(results_path):
        raise DataError(f"no run artifacts at {results_path}; run the experiment first")
    results = read_results(results_path)

    wanted = args.models[0] if args.models else cfg.models[0].id
    if args.models and len(args.models) > 1:
        raise ConfigError("timeline takes a single model id")
    rows = [
        r for r in results if r.model == wanted and r.repetition == 0 and not r.skipped
    ]
    if not rows:
        raise DataError(f"no rows for model {wanted!r} in {results_path}")
    points = []
    for r in sorted(rows, key=lambda r: r.iteration):
        for date_str, prob in zip(r.dates, r.probabilities):
            date = dt.date.fromisoformat(date_str)
            if cfg.since is not None and date < cfg.since:
                continue
            points.append((date, prob))
    points.sort()
    print(f"model: {wanted}")
    print("week        date  probability  marking")
    for i, (date, prob) in enumerate(points, start=1):
        print(f"W{i:<3} {date}      {prob:.5f}  {trade_marking(prob)}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = _load_with_overrides(args)
    if cfg.data.kind != "synthetic":
        raise ConfigError("synth verb needs a config with synthetic data")
    out_dir = args.out or cfg.out_dir
    if out_dir is None:
        raise ConfigError("no output directory: pass --out or set out_dir in the config")
    dataset = generate_market(cfg.data.synth)
    paths = write_market_csvs(dataset, out_dir)
    for name in ("options", "spx", "vix"):
        print(f"{name}: {paths[name]}")
    return 0


def _load_with_overrides(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    models = args.models if getattr(args, "models", None) else None
    since = parse_date(args.since) if getattr(args, "since", None) else None
    return apply_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        models=models,
        since=since,
        full_estimators=getattr(args, "full_estimators", False) or None,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="straddleml",
        description="Walk-forward evaluation of ML-filtered short-straddle trading.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True,
                       help="config path or bundled name (exp-1.1 .. exp-2.2)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument("--models", type=lambda s: s.split(","),
                       help="comma-separated model ids to keep")
        p.add_argument("--since", help="cutoff date YYYY-MM-DD for late-period views")
        p.add_argument("--full-estimators", action="store_true",
                       dest="full_estimators",
                       help="raise ensemble sizes to 701 trees/stages")

    p_run = sub.add_parser("run", help="execute an experiment")
    common(p_run)
    p_run.add_argument("--dry-run", action="store_true", dest="dry_run",
                       help="print the split plan without training")
    p_run.set_defaults(func=_cmd_run)

    p_dry = sub.add_parser("dry-run", help="print the split plan without training")
    common(p_dry)
    p_dry.set_defaults(func=_cmd_run, dry_run=True)

    p_tl = sub.add_parser("timeline", help="weekly probability table from a finished run")
    common(p_tl)
    p_tl.set_defaults(func=_cmd_timeline)

    p_synth = sub.add_parser("synth", help="write synthetic market CSVs")
    common(p_synth)
    p_synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
