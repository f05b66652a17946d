"""Assemble per-decision-date feature vectors and labeled trade samples.

Feature universe (configs pick an ordered subset):

    putPrice, callPrice   leg sell prices of the straddle
    strike                the traded strike
    spx1..spx5            index close j days back divided by the current close
    vix0..vix5            raw VIX closes at lags 0..5
    daysToExpiry          calendar days from decision to expiry
    spxHigh, spxLow       decision-date index bar extremes
    vixHigh, vixLow       decision-date VIX bar extremes
    pmSettled             settlement style of the traded contracts (0/1)

Index closes enter as ratios to the current value so the model sees recent
development rather than absolute levels; VIX enters as raw levels.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass

import numpy as np

from .calendars import fridays_between
from .data_ingest import MarketDataset
from .errors import DataError
from .strategy_engine import build_straddle, settle_from_dataset

log = logging.getLogger(__name__)

FEATURE_NAMES = (
    "putPrice",
    "callPrice",
    "strike",
    "spx1",
    "spx2",
    "spx3",
    "spx4",
    "spx5",
    "vix0",
    "vix1",
    "vix2",
    "vix3",
    "vix4",
    "vix5",
    "daysToExpiry",
    "spxHigh",
    "spxLow",
    "vixHigh",
    "vixLow",
    "pmSettled",
)


class FeatureUnavailableError(DataError):
    """A requested feature cannot be computed for this decision date."""


@dataclass(frozen=True)
class TradeSampleRecord:
    """One labeled decision point: features plus realized outcome."""

    sample_id: int
    trade_date: dt.date
    features: dict[str, float]
    profit: float
    label: int


def normalize_feature_names(names: list[str]) -> list[str]:
    """Validate a requested feature list, dropping duplicates but keeping order."""
    seen: list[str] = []
    for name in names:
        if name not in FEATURE_NAMES:
            raise DataError(f"unknown feature {name!r}")
        if name not in seen:
            seen.append(name)
    if not seen:
        raise DataError("feature list is empty")
    return seen


def relative_spx(closes: list[float], lag: int) -> float:
    """Close lag days back relative to the current close.

    closes is ordered oldest to newest with the decision date last and must
    cover at least lag + 1 entries.
    """
    if not 1 <= lag <= 5:
        raise ValueError(f"lag must be in 1..5, got {lag}")
    if len(closes) < lag + 1:
        raise FeatureUnavailableError(f"need {lag + 1} closes for lag {lag}, have {len(closes)}")
    current = closes[-1]
    if current <= 0:
        raise DataError("index close must be positive")
    return closes[-1 - lag] / current


def build_sample(
    dataset: MarketDataset,
    trade_date: dt.date,
    tenor: int,
    feature_names: list[str],
    sample_id: int = 0,
) -> TradeSampleRecord:
    """Build the feature vector and realized outcome for one decision date.

    Raises a DataError subclass when the straddle cannot be built or settled
    or when a requested feature has insufficient history; callers driving a
    schedule skip such dates.
    """
    names = normalize_feature_names(feature_names)
    trade = build_straddle(dataset, trade_date, tenor)
    settled = settle_from_dataset(dataset, trade)

    dates = dataset.dates
    pos = dates.index(trade_date) if trade_date in dataset.quotes_by_date else -1
    if pos < 0:
        raise FeatureUnavailableError(f"{trade_date} not in dataset")
    spx_closes = [b.close for b in dataset.spx_bars]
    vix_closes = [b.close for b in dataset.vix_bars]
    spx_day = dataset.spx_bar(trade_date)
    vix_day = dataset.vix_bar(trade_date)

    def vix_lag(lag: int) -> float:
        if pos - lag < 0:
            raise FeatureUnavailableError(f"{trade_date}: no VIX history at lag {lag}")
        return vix_closes[pos - lag]

    values: dict[str, float] = {}
    for name in names:
        if name == "putPrice":
            values[name] = trade.put_sell_price
        elif name == "callPrice":
            values[name] = trade.call_sell_price
        elif name == "strike":
            values[name] = trade.strike_K1
        elif name.startswith("spx") and name[3:].isdigit():
            lag = int(name[3:])
            if pos - lag < 0:
                raise FeatureUnavailableError(f"{trade_date}: no SPX history at lag {lag}")
            values[name] = relative_spx(spx_closes[max(0, pos - 5): pos + 1], lag)
        elif name.startswith("vix") and name[3:].isdigit():
            values[name] = vix_lag(int(name[3:]))
        elif name == "daysToExpiry":
            values[name] = float(trade.days_to_expiry)
        elif name == "spxHigh":
            values[name] = spx_day.high
        elif name == "spxLow":
            values[name] = spx_day.low
        elif name == "vixHigh":
            values[name] = vix_day.high
        elif name == "vixLow":
            values[name] = vix_day.low
        elif name == "pmSettled":
            values[name] = float(trade.pm_settled)
        else:  # pragma: no cover - normalize_feature_names guards this
            raise DataError(f"unknown feature {name!r}")

    for name, value in values.items():
        if not np.isfinite(value):
            raise DataError(f"{trade_date}: feature {name} is not finite")
    return TradeSampleRecord(
        sample_id=sample_id,
        trade_date=trade_date,
        features=values,
        profit=settled.profit,
        label=settled.label,
    )


def weekly_schedule(dataset: MarketDataset, start: dt.date) -> list[dt.date]:
    """Fridays between ``start`` and the end of the data that are trading days."""
    dates = dataset.dates
    if not dates:
        raise DataError("dataset has no trading dates")
    have = set(dates)
    return [d for d in fridays_between(start, dates[-1]) if d in have]


def build_dataset(
    dataset: MarketDataset,
    schedule: list[dt.date],
    tenor: int,
    feature_names: list[str],
) -> list[TradeSampleRecord]:
    """Build samples for every constructible date in the schedule.

    Dates whose straddle cannot be built, settled, or featurized are skipped
    with a warning.  Output is date ordered with dense sample ids from 0.
    """
    names = normalize_feature_names(feature_names)
    records: list[TradeSampleRecord] = []
    for trade_date in sorted(set(schedule)):
        try:
            record = build_sample(dataset, trade_date, tenor, names, sample_id=len(records))
        except DataError as exc:
            log.warning("skipping %s: %s", trade_date, exc)
            continue
        records.append(record)
    if not records:
        raise DataError("no samples could be built from the given schedule")
    return records


def feature_matrix(records: list[TradeSampleRecord], feature_names: list[str]) -> np.ndarray:
    """Stack sample features into an (n_samples, n_features) array in config order."""
    return np.array(
        [[r.features[name] for name in feature_names] for r in records], dtype=float
    )


def labels_of(records: list[TradeSampleRecord]) -> np.ndarray:
    return np.array([r.label for r in records], dtype=int)


def profits_of(records: list[TradeSampleRecord]) -> np.ndarray:
    return np.array([r.profit for r in records], dtype=float)


def write_samples(records: list[TradeSampleRecord], path: str) -> None:
    """Export built samples as CSV: sample_id,trade_date,<features...>,profit,label."""
    if not records:
        raise DataError("nothing to write")
    names = list(records[0].features)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_id", "trade_date", *names, "profit", "label"])
        for r in records:
            writer.writerow(
                [r.sample_id, r.trade_date.isoformat()]
                + [repr(r.features[n]) for n in names]
                + [repr(r.profit), r.label]
            )


def read_samples(path: str) -> list[TradeSampleRecord]:
    """Load samples previously written by write_samples."""
    records: list[TradeSampleRecord] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:2] != ["sample_id", "trade_date"] or header[-2:] != ["profit", "label"]:
            raise DataError(f"{path}:1: not a samples CSV")
        names = header[2:-2]
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields")
            try:
                records.append(
                    TradeSampleRecord(
                        sample_id=int(row[0]),
                        trade_date=dt.date.fromisoformat(row[1]),
                        features={n: float(v) for n, v in zip(names, row[2:-2])},
                        profit=float(row[-2]),
                        label=int(row[-1]),
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
    if not records:
        raise DataError(f"{path}: no samples")
    return records
