"""Seeded synthetic market: index path, volatility path, and option quotes.

The index follows geometric Brownian steps whose daily volatility is the
running volatility level divided by 100, scaled by realized_ratio; the
volatility level itself mean reverts with its own noise, correlated with the
index shocks through rho in [-1, 0].  Quotes are zero-rate zero-dividend
Black-Scholes mids around a strike grid centered on spot, so put-call parity
C - P = S - K holds by construction.  A fixed relative-plus-floor spread is
laid around each mid and the bid is clamped at zero.

Expiries quoted on a date are the next trading dates at or after each
configured tenor.  Third-Friday expiries are flagged as AM settled
(pm_settled = 0), all others as PM weeklies.  Trading days are weekdays
minus a seeded draw of synthetic holidays, so some weeks have no Friday.

Everything, including holidays and quote volumes, derives from the seed.
"""

from __future__ import annotations

import datetime as dt
import math
import os
from dataclasses import dataclass

import numpy as np

from .calendars import is_third_friday
from .data_ingest import (
    DailyBar,
    MarketDataset,
    OptionQuote,
    align_calendar,
    write_daily_bars,
    write_option_chain,
)

_DT_YEARS = 1.0 / 252.0
_VOL_FLOOR = 5.0
_VOL_CAP = 150.0
MIN_SPREAD = 0.2
SPREAD_FRACTION = 0.01


@dataclass(frozen=True)
class SynthConfig:
    start: dt.date
    end: dt.date
    seed: int = 0
    spx_start: float = 2800.0
    vix_start: float = 18.0
    vix_mean: float = 18.0
    vix_kappa: float = 6.0
    vix_vol: float = 1.2
    rho: float = -0.7
    realized_ratio: float = 0.85
    tenors: tuple[int, ...] = (7, 14)
    strike_band: float = 0.05
    strike_step: float = 5.0
    holidays_per_year: int = 8

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError("start must precede end")
        if not -1.0 <= self.rho <= 0.0:
            raise ValueError("rho must lie in [-1, 0]")
        for name in ("spx_start", "vix_start", "vix_mean", "realized_ratio",
                     "strike_band", "strike_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.tenors or any(t < 1 for t in self.tenors):
            raise ValueError("tenors must be positive day counts")


def trading_calendar(
    start: dt.date, end: dt.date, seed: int, holidays_per_year: int
) -> list[dt.date]:
    """Weekdays in [start, end] minus seeded synthetic holidays."""
    weekdays = []
    day = start
    while day <= end:
        if day.weekday() < 5:
            weekdays.append(day)
        day += dt.timedelta(days=1)
    holidays: set[dt.date] = set()
    for year in range(start.year, end.year + 1):
        year_days = [d for d in weekdays if d.year == year]
        if not year_days:
            continue
        rng = np.random.default_rng([seed, year, 0x110])
        pick = rng.choice(len(year_days), size=min(holidays_per_year, len(year_days)),
                          replace=False)
        holidays.update(year_days[i] for i in pick)
    return [d for d in weekdays if d not in holidays]


def _norm_cdf(v: float) -> float:
    return 0.5 * math.erfc(-v / math.sqrt(2.0))


def black_scholes_quote(
    spot: float, strike: float, sigma: float, years: float
) -> tuple[float, float]:
    """Zero-rate zero-dividend (call, put) mid prices; intrinsic as vol*time -> 0."""
    st = sigma * math.sqrt(years)
    if st <= 0.0:
        call = max(spot - strike, 0.0)
        return call, call - spot + strike
    d1 = (math.log(spot / strike) + 0.5 * sigma * sigma * years) / st
    d2 = d1 - st
    call = spot * _norm_cdf(d1) - strike * _norm_cdf(d2)
    put = call - spot + strike
    return call, max(put, 0.0)


def _spread_quote(mid: float) -> tuple[float, float]:
    spread = max(MIN_SPREAD, SPREAD_FRACTION * mid)
    return max(0.0, mid - 0.5 * spread), mid + 0.5 * spread


def generate_market(cfg: SynthConfig) -> MarketDataset:
    """Simulate paths and quotes over the configured span."""
    horizon = cfg.end + dt.timedelta(days=2 * max(cfg.tenors) + 14)
    extended = trading_calendar(cfg.start, horizon, cfg.seed, cfg.holidays_per_year)
    calendar = [d for d in extended if d <= cfg.end]
    n = len(calendar)
    if n < 2:
        raise ValueError("calendar too short; widen the date span")

    rng = np.random.default_rng([cfg.seed, 1])
    z1 = rng.standard_normal(n)
    z2 = cfg.rho * z1 + math.sqrt(1.0 - cfg.rho * cfg.rho) * rng.standard_normal(n)
    range_draws = np.abs(rng.standard_normal((n, 4)))
    volume_draws = rng.integers(10, 10000, size=4 * n * len(cfg.tenors) * 200)

    spx = np.empty(n)
    vix = np.empty(n)
    spx[0] = cfg.spx_start
    vix[0] = cfg.vix_start
    for i in range(1, n):
        v = vix[i - 1]
        v_next = (
            v
            + cfg.vix_kappa * (cfg.vix_mean - v) * _DT_YEARS
            + cfg.vix_vol * v * math.sqrt(_DT_YEARS) * z2[i]
        )
        vix[i] = min(max(v_next, _VOL_FLOOR), _VOL_CAP)
        sigma = cfg.realized_ratio * vix[i - 1] / 100.0
        spx[i] = spx[i - 1] * math.exp(
            -0.5 * sigma * sigma * _DT_YEARS + sigma * math.sqrt(_DT_YEARS) * z1[i]
        )

    def bars(levels: np.ndarray, rel_width: np.ndarray, hi_d: np.ndarray, lo_d: np.ndarray):
        out = []
        for i, date in enumerate(calendar):
            close = float(levels[i])
            open_ = float(levels[i - 1]) if i else close
            top = max(open_, close)
            bottom = min(open_, close)
            hi_frac = min(float(hi_d[i] * rel_width[i]), 0.4)
            lo_frac = min(float(lo_d[i] * rel_width[i]), 0.4)
            out.append(
                DailyBar(
                    date=date,
                    open=open_,
                    high=top * (1.0 + hi_frac),
                    low=bottom * (1.0 - lo_frac),
                    close=close,
                )
            )
        return out

    spx_width = cfg.realized_ratio * vix / 100.0 * math.sqrt(_DT_YEARS) * 0.5
    vix_width = np.full(n, cfg.vix_vol * math.sqrt(_DT_YEARS) * 0.5)
    spx_bars = bars(spx, spx_width, range_draws[:, 0], range_draws[:, 1])
    vix_bars = bars(vix, vix_width, range_draws[:, 2], range_draws[:, 3])

    quotes: list[OptionQuote] = []
    vol_idx = 0
    for i, date in enumerate(calendar):
        spot = float(spx[i])
        sigma = float(vix[i]) / 100.0
        lo_k = math.floor(spot * (1.0 - cfg.strike_band) / cfg.strike_step)
        hi_k = math.ceil(spot * (1.0 + cfg.strike_band) / cfg.strike_step)
        strikes = [k * cfg.strike_step for k in range(lo_k, hi_k + 1)]
        for tenor in cfg.tenors:
            target = date + dt.timedelta(days=tenor)
            expiry = next((d for d in extended if d >= target), None)
            if expiry is None:
                continue
            years = (expiry - date).days / 365.0
            pm = not is_third_friday(expiry)
            for strike in strikes:
                call_mid, put_mid = black_scholes_quote(spot, strike, sigma, years)
                for right, mid in (("C", call_mid), ("P", put_mid)):
                    bid, ask = _spread_quote(mid)
                    quotes.append(
                        OptionQuote(
                            trade_date=date,
                            expiry_date=expiry,
                            right=right,
                            strike=strike,
                            bid=bid,
                            ask=ask,
                            volume=int(volume_draws[vol_idx % len(volume_draws)]),
                            open_interest=int(volume_draws[(vol_idx + 1) % len(volume_draws)]),
                            pm_settled=pm,
                        )
                    )
                    vol_idx += 2
    return align_calendar(quotes, spx_bars, vix_bars)


def write_market_csvs(dataset: MarketDataset, out_dir: str) -> dict[str, str]:
    """Write options.csv, spx.csv, vix.csv under out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "options": os.path.join(out_dir, "options.csv"),
        "spx": os.path.join(out_dir, "spx.csv"),
        "vix": os.path.join(out_dir, "vix.csv"),
    }
    all_quotes = [q for d in dataset.dates for q in dataset.quotes_by_date[d]]
    write_option_chain(all_quotes, paths["options"])
    write_daily_bars(dataset.spx_bars, paths["spx"])
    write_daily_bars(dataset.vix_bars, paths["vix"])
    return paths
