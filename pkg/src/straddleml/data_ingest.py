"""Load, validate, and calendar-align daily option-chain, index, and VIX data.

All ingestion is CSV based.  Option chain files carry one quote per row
(columns: trade_date,expiry_date,right,strike,bid,ask,volume,open_interest,
pm_settled), bar files one day per row (date,open,high,low,close).  Dates are
ISO-8601, rights are P/C, and every record invariant is enforced at load time
so that no invalid record can enter a MarketDataset.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field

from .errors import DataError

log = logging.getLogger(__name__)

OPTION_COLUMNS = [
    "trade_date",
    "expiry_date",
    "right",
    "strike",
    "bid",
    "ask",
    "volume",
    "open_interest",
    "pm_settled",
]
BAR_COLUMNS = ["date", "open", "high", "low", "close"]


@dataclass(frozen=True)
class OptionQuote:
    """One option's end-of-day market record."""

    trade_date: dt.date
    expiry_date: dt.date
    right: str  # "P" or "C"
    strike: float
    bid: float
    ask: float
    volume: int
    open_interest: int
    pm_settled: bool

    def __post_init__(self) -> None:
        if self.right not in ("P", "C"):
            raise DataError(f"option right must be P or C, got {self.right!r}")
        if not 0 <= self.bid <= self.ask:
            raise DataError(
                f"quote {self.trade_date} {self.right}{self.strike}: "
                f"need 0 <= bid <= ask, got bid={self.bid} ask={self.ask}"
            )
        if self.expiry_date < self.trade_date:
            raise DataError(
                f"quote {self.trade_date}: expiry {self.expiry_date} before trade date"
            )
        if not self.strike > 0:
            raise DataError(f"quote {self.trade_date}: strike must be positive")


@dataclass(frozen=True)
class DailyBar:
    """One day's OHLC bar for an index series."""

    date: dt.date
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self) -> None:
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise DataError(
                f"bar {self.date}: open/close must lie within [low, high] "
                f"(o={self.open} h={self.high} l={self.low} c={self.close})"
            )
        if not self.low > 0:
            raise DataError(f"bar {self.date}: low must be positive")


@dataclass(frozen=True)
class MarketDataset:
    """Calendar-aligned market data, immutable after construction.

    quotes_by_date maps each trade date to the quotes listed on that date
    (file order preserved).  spx_bars and vix_bars cover exactly the same
    dates, strictly increasing.  dropped_dates records dates discarded
    during alignment.
    """

    quotes_by_date: dict[dt.date, tuple[OptionQuote, ...]]
    spx_bars: tuple[DailyBar, ...]
    vix_bars: tuple[DailyBar, ...]
    dropped_dates: tuple[dt.date, ...] = field(default=())

    def __post_init__(self) -> None:
        dates = self.dates
        for series_name, bars in (("spx", self.spx_bars), ("vix", self.vix_bars)):
            bar_dates = [b.date for b in bars]
            if any(b >= a for a, b in zip(bar_dates[1:], bar_dates[:-1])):
                raise DataError(f"{series_name} bars are not strictly increasing")
            if bar_dates != dates:
                raise DataError(f"{series_name} bar dates do not match option trade dates")

    @property
    def dates(self) -> list[dt.date]:
        return sorted(self.quotes_by_date)

    def spx_bar(self, date: dt.date) -> DailyBar:
        bar = self._spx_index().get(date)
        if bar is None:
            raise DataError(f"no SPX bar for {date}")
        return bar

    def vix_bar(self, date: dt.date) -> DailyBar:
        bar = self._vix_index().get(date)
        if bar is None:
            raise DataError(f"no VIX bar for {date}")
        return bar

    def _spx_index(self) -> dict[dt.date, DailyBar]:
        cached = getattr(self, "_spx_cache", None)
        if cached is None:
            cached = {b.date: b for b in self.spx_bars}
            object.__setattr__(self, "_spx_cache", cached)
        return cached

    def _vix_index(self) -> dict[dt.date, DailyBar]:
        cached = getattr(self, "_vix_cache", None)
        if cached is None:
            cached = {b.date: b for b in self.vix_bars}
            object.__setattr__(self, "_vix_cache", cached)
        return cached


def _parse_date(text: str, path: str, line_no: int, column: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"{path}:{line_no}: bad {column} {text!r}") from exc


def _parse_float(text: str, path: str, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise DataError(f"{path}:{line_no}: bad {column} {text!r}") from exc


def _parse_int(text: str, path: str, line_no: int, column: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise DataError(f"{path}:{line_no}: bad {column} {text!r}") from exc


def load_option_chain(path: str) -> list[OptionQuote]:
    """Read an option chain CSV, preserving row order.

    Raises DataError with the offending line number on malformed rows and on
    invariant violations (bid > ask, negative strike, expiry before trade).
    """
    quotes: list[OptionQuote] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != OPTION_COLUMNS:
            raise DataError(f"{path}:1: expected header {','.join(OPTION_COLUMNS)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(OPTION_COLUMNS):
                raise DataError(
                    f"{path}:{line_no}: expected {len(OPTION_COLUMNS)} fields, got {len(row)}"
                )
            right = row[2].strip().upper()
            pm_raw = row[8].strip()
            if pm_raw not in ("0", "1"):
                raise DataError(f"{path}:{line_no}: pm_settled must be 0 or 1, got {pm_raw!r}")
            try:
                quote = OptionQuote(
                    trade_date=_parse_date(row[0], path, line_no, "trade_date"),
                    expiry_date=_parse_date(row[1], path, line_no, "expiry_date"),
                    right=right,
                    strike=_parse_float(row[3], path, line_no, "strike"),
                    bid=_parse_float(row[4], path, line_no, "bid"),
                    ask=_parse_float(row[5], path, line_no, "ask"),
                    volume=_parse_int(row[6], path, line_no, "volume"),
                    open_interest=_parse_int(row[7], path, line_no, "open_interest"),
                    pm_settled=pm_raw == "1",
                )
            except DataError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            quotes.append(quote)
    return quotes


def load_daily_bars(path: str) -> list[DailyBar]:
    """Read a date-ordered OHLC CSV; duplicate or out-of-order dates are rejected."""
    bars: list[DailyBar] = []
    last_date: dt.date | None = None
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != BAR_COLUMNS:
            raise DataError(f"{path}:1: expected header {','.join(BAR_COLUMNS)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(BAR_COLUMNS):
                raise DataError(
                    f"{path}:{line_no}: expected {len(BAR_COLUMNS)} fields, got {len(row)}"
                )
            date = _parse_date(row[0], path, line_no, "date")
            if last_date is not None:
                if date == last_date:
                    raise DataError(f"{path}:{line_no}: duplicate date {date}")
                if date < last_date:
                    raise DataError(f"{path}:{line_no}: date {date} out of order")
            try:
                bar = DailyBar(
                    date=date,
                    open=_parse_float(row[1], path, line_no, "open"),
                    high=_parse_float(row[2], path, line_no, "high"),
                    low=_parse_float(row[3], path, line_no, "low"),
                    close=_parse_float(row[4], path, line_no, "close"),
                )
            except DataError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            bars.append(bar)
            last_date = date
    return bars


def align_calendar(
    quotes: list[OptionQuote],
    spx: list[DailyBar],
    vix: list[DailyBar],
) -> MarketDataset:
    """Restrict all three sources to their common trade dates.

    Dates present in some sources but not all are dropped; they are logged and
    recorded on the returned dataset's dropped_dates.  An empty intersection
    is an error.
    """
    quote_dates = {q.trade_date for q in quotes}
    spx_dates = {b.date for b in spx}
    vix_dates = {b.date for b in vix}
    common = quote_dates & spx_dates & vix_dates
    if not common:
        raise DataError("no common dates between option, SPX, and VIX data")
    dropped = sorted((quote_dates | spx_dates | vix_dates) - common)
    if dropped:
        log.warning("align_calendar: dropping %d date(s) missing from some source: %s",
                    len(dropped), ", ".join(str(d) for d in dropped[:10]))

    by_date: dict[dt.date, list[OptionQuote]] = {}
    for quote in quotes:
        if quote.trade_date in common:
            by_date.setdefault(quote.trade_date, []).append(quote)
    ordered = sorted(common)
    return MarketDataset(
        quotes_by_date={d: tuple(by_date[d]) for d in ordered},
        spx_bars=tuple(b for b in spx if b.date in common),
        vix_bars=tuple(b for b in vix if b.date in common),
        dropped_dates=tuple(dropped),
    )


def _fmt(value: float) -> str:
    # repr round-trips float64 exactly, which keeps load -> write -> load identical
    return repr(value)


def write_option_chain(quotes: list[OptionQuote], path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(OPTION_COLUMNS)
        for q in quotes:
            writer.writerow([
                q.trade_date.isoformat(),
                q.expiry_date.isoformat(),
                q.right,
                _fmt(q.strike),
                _fmt(q.bid),
                _fmt(q.ask),
                q.volume,
                q.open_interest,
                int(q.pm_settled),
            ])


def write_daily_bars(bars: list[DailyBar], path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(BAR_COLUMNS)
        for b in bars:
            writer.writerow([b.date.isoformat(), _fmt(b.open), _fmt(b.high), _fmt(b.low), _fmt(b.close)])
