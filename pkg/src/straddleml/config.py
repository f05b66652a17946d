"""Versioned JSON experiment configuration.

Schema (version 1), unknown keys rejected at every level:

    schema_version   1
    name             free-form run label
    data             {"kind": "synthetic", "start", "end", ...generator knobs}
                     or {"kind": "csv", "options", "spx", "vix"} with paths
                     resolved relative to the config file
    feature_names    ordered feature subset (duplicates collapse, order kept)
    split_frequency  walk-forward step in months
    test_start       "YYYY-MM": first test month
    train_start      "YYYY-MM-DD": first decision date considered
    tenor            straddle tenor in calendar days
    iterations       seed repetitions per window (only the forest varies)
    epochs           optimizer segments for iterative models
    evaluate_every   objective-logging cadence in epochs (0 = off)
    models           [{"id", "kind", "hyperparameters"?}, ...]
    threshold_mode   "avg_all" (default) or "per_trade"
    weight_mode      "absolute" (default) or "signed"
    since            optional cutoff date for the late-period table
    out_dir          optional default output directory
    base_seed        root of all derived seeds
    full_estimators  when true, raise ensemble sizes to 701

Bundled configs exp-1.1 / exp-1.2 / exp-2.1 / exp-2.2 ship inside the
package and can be referenced by bare name.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Any

from .calendars import parse_date, parse_month
from .classifiers import ClassifierSpec
from .errors import ConfigError
from .feature_builder import normalize_feature_names
from .prequential import ALL_MODEL_ID
from .synth_data import SynthConfig

SCHEMA_VERSION = 1
FULL_ESTIMATORS = 701
BUNDLED = ("exp-1.1", "exp-1.2", "exp-2.1", "exp-2.2")

_TOP_KEYS = {
    "schema_version",
    "name",
    "data",
    "feature_names",
    "split_frequency",
    "test_start",
    "train_start",
    "tenor",
    "iterations",
    "epochs",
    "evaluate_every",
    "models",
    "threshold_mode",
    "weight_mode",
    "since",
    "out_dir",
    "base_seed",
    "full_estimators",
}
_SYNTH_KEYS = {
    "kind",
    "start",
    "end",
    "seed",
    "spx_start",
    "vix_start",
    "vix_mean",
    "vix_kappa",
    "vix_vol",
    "rho",
    "realized_ratio",
    "tenors",
    "strike_band",
    "strike_step",
    "holidays_per_year",
}
_CSV_KEYS = {"kind", "options", "spx", "vix"}
_MODEL_KEYS = {"id", "kind", "hyperparameters"}


@dataclass(frozen=True)
class DataSource:
    kind: str  # "synthetic" or "csv"
    synth: SynthConfig | None = None
    options_path: str | None = None
    spx_path: str | None = None
    vix_path: str | None = None


@dataclass(frozen=True)
class ModelEntry:
    id: str
    spec: ClassifierSpec


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    data: DataSource
    feature_names: tuple[str, ...]
    split_frequency: int
    test_start: tuple[int, int]
    train_start: dt.date
    tenor: int
    iterations: int
    epochs: int
    evaluate_every: int
    models: tuple[ModelEntry, ...]
    threshold_mode: str
    weight_mode: str
    since: dt.date | None
    out_dir: str | None
    base_seed: int
    full_estimators: bool
    raw: dict[str, Any]  # resolved dict as loaded, for the manifest

    def model_specs(self) -> dict[str, ClassifierSpec]:
        return {m.id: m.spec for m in self.models}


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return obj[key]


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _as_int(value: Any, where: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_data(obj: Any, base_dir: str) -> DataSource:
    if not isinstance(obj, dict):
        raise ConfigError("data: expected an object")
    kind = _require(obj, "kind", "data")
    if kind == "synthetic":
        _check_keys(obj, _SYNTH_KEYS, "data")
        kwargs: dict[str, Any] = {
            "start": parse_date(str(_require(obj, "start", "data"))),
            "end": parse_date(str(_require(obj, "end", "data"))),
        }
        for key in ("seed", "holidays_per_year"):
            if key in obj:
                kwargs[key] = _as_int(obj[key], f"data.{key}")
        for key in ("spx_start", "vix_start", "vix_mean", "vix_kappa", "vix_vol",
                    "rho", "realized_ratio", "strike_band", "strike_step"):
            if key in obj:
                kwargs[key] = _as_number(obj[key], f"data.{key}")
        if "tenors" in obj:
            tenors = obj["tenors"]
            if not isinstance(tenors, list) or not tenors:
                raise ConfigError("data.tenors: expected a non-empty list")
            kwargs["tenors"] = tuple(_as_int(t, "data.tenors", 1) for t in tenors)
        try:
            synth = SynthConfig(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"data: {exc}") from None
        return DataSource(kind="synthetic", synth=synth)
    if kind == "csv":
        _check_keys(obj, _CSV_KEYS, "data")
        paths = {}
        for key in ("options", "spx", "vix"):
            value = _require(obj, key, "data")
            if not isinstance(value, str) or not value:
                raise ConfigError(f"data.{key}: expected a path")
            paths[key] = value if os.path.isabs(value) else os.path.join(base_dir, value)
        return DataSource(
            kind="csv",
            options_path=paths["options"],
            spx_path=paths["spx"],
            vix_path=paths["vix"],
        )
    raise ConfigError(f"data.kind: expected 'synthetic' or 'csv', got {kind!r}")


def _parse_models(obj: Any, full_estimators: bool) -> tuple[ModelEntry, ...]:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("models: expected a non-empty list")
    entries = []
    seen: set[str] = set()
    for i, item in enumerate(obj):
        where = f"models[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected an object")
        _check_keys(item, _MODEL_KEYS, where)
        model_id = _require(item, "id", where)
        if not isinstance(model_id, str) or not model_id:
            raise ConfigError(f"{where}.id: expected a non-empty string")
        if model_id == ALL_MODEL_ID:
            raise ConfigError(f"{where}.id: {ALL_MODEL_ID!r} is reserved")
        if model_id in seen:
            raise ConfigError(f"{where}.id: duplicate model id {model_id!r}")
        seen.add(model_id)
        kind = _require(item, "kind", where)
        hyper = item.get("hyperparameters", {})
        if not isinstance(hyper, dict):
            raise ConfigError(f"{where}.hyperparameters: expected an object")
        if full_estimators and kind in ("random_forest", "gradient_boosting"):
            hyper = {**hyper, "n_estimators": FULL_ESTIMATORS}
        try:
            spec = ClassifierSpec(kind=kind, hyperparameters=hyper)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        entries.append(ModelEntry(id=model_id, spec=spec))
    return tuple(entries)


def parse_config(obj: dict[str, Any], base_dir: str = ".") -> ExperimentConfig:
    """Validate a loaded JSON object into an ExperimentConfig."""
    if not isinstance(obj, dict):
        raise ConfigError("top level: expected an object")
    _check_keys(obj, _TOP_KEYS, "top level")
    version = _require(obj, "schema_version", "top level")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    name = obj.get("name", "unnamed")
    if not isinstance(name, str):
        raise ConfigError("name: expected a string")
    full = obj.get("full_estimators", False)
    if not isinstance(full, bool):
        raise ConfigError("full_estimators: expected true/false")
    data = _parse_data(_require(obj, "data", "top level"), base_dir)
    features_raw = _require(obj, "feature_names", "top level")
    if not isinstance(features_raw, list) or not all(
        isinstance(f, str) for f in features_raw
    ):
        raise ConfigError("feature_names: expected a list of strings")
    try:
        features = tuple(normalize_feature_names(list(features_raw)))
    except Exception as exc:
        raise ConfigError(f"feature_names: {exc}") from None
    threshold_mode = obj.get("threshold_mode", "avg_all")
    if threshold_mode not in ("avg_all", "per_trade"):
        raise ConfigError(
            f"threshold_mode: expected 'avg_all' or 'per_trade', got {threshold_mode!r}"
        )
    weight_mode = obj.get("weight_mode", "absolute")
    if weight_mode not in ("absolute", "signed"):
        raise ConfigError(
            f"weight_mode: expected 'absolute' or 'signed', got {weight_mode!r}"
        )
    since_raw = obj.get("since")
    since = None if since_raw in (None, "") else parse_date(str(since_raw))
    out_dir = obj.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir: expected a string path")
    return ExperimentConfig(
        name=name,
        data=data,
        feature_names=features,
        split_frequency=_as_int(_require(obj, "split_frequency", "top level"),
                                "split_frequency", 1),
        test_start=parse_month(str(_require(obj, "test_start", "top level"))),
        train_start=parse_date(str(_require(obj, "train_start", "top level"))),
        tenor=_as_int(_require(obj, "tenor", "top level"), "tenor", 1),
        iterations=_as_int(obj.get("iterations", 1), "iterations", 1),
        epochs=_as_int(obj.get("epochs", 1), "epochs", 1),
        evaluate_every=_as_int(obj.get("evaluate_every", 0), "evaluate_every", 0),
        models=_parse_models(_require(obj, "models", "top level"), full),
        threshold_mode=threshold_mode,
        weight_mode=weight_mode,
        since=since,
        out_dir=out_dir,
        base_seed=_as_int(obj.get("base_seed", 0), "base_seed"),
        full_estimators=full,
        raw=obj,
    )


def resolve_config_path(ref: str) -> tuple[str, bool]:
    """Map a --config argument to a readable path.

    A bare bundled name (exp-1.1 etc.) resolves into the packaged configs;
    anything else must be an existing file.  Returns (path, is_bundled).
    """
    if ref in BUNDLED:
        packaged = resources.files("straddleml").joinpath(f"configs/{ref}.json")
        return str(packaged), True
    if os.path.exists(ref):
        return ref, False
    raise ConfigError(
        f"config {ref!r} not found; expected a file path or one of {', '.join(BUNDLED)}"
    )


def load_config(ref: str) -> ExperimentConfig:
    """Load and validate a config by path or bundled name."""
    path, _ = resolve_config_path(ref)
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(obj, base_dir=os.path.dirname(os.path.abspath(path)))


def apply_overrides(
    cfg: ExperimentConfig,
    seed: int | None = None,
    models: list[str] | None = None,
    since: dt.date | None = None,
    full_estimators: bool | None = None,
) -> ExperimentConfig:
    """CLI flag overrides on top of a parsed config."""
    raw = dict(cfg.raw)
    updates: dict[str, Any] = {"raw": raw}
    if seed is not None:
        updates["base_seed"] = seed
        raw["base_seed"] = seed
    if since is not None:
        updates["since"] = since
        raw["since"] = since.isoformat()
    if full_estimators:
        raw["full_estimators"] = True
        bumped = []
        for m in cfg.models:
            hyper = dict(m.spec.hyperparameters)
            if m.spec.kind in ("random_forest", "gradient_boosting"):
                hyper["n_estimators"] = FULL_ESTIMATORS
            bumped.append(
                ModelEntry(id=m.id, spec=ClassifierSpec(kind=m.spec.kind, hyperparameters=hyper))
            )
        updates["models"] = tuple(bumped)
        updates["full_estimators"] = True
    if models is not None:
        known = {m.id for m in cfg.models}
        missing = [m for m in models if m not in known]
        if missing:
            raise ConfigError(
                f"--models: unknown id(s) {missing}; config defines {sorted(known)}"
            )
        chosen = updates.get("models", cfg.models)
        updates["models"] = tuple(m for m in chosen if m.id in set(models))
        raw["models"] = [m for m in raw.get("models", []) if m.get("id") in set(models)]
    return dataclasses.replace(cfg, **updates)


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable digest of the resolved config for the run manifest."""
    canonical = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
