"""Construct, price, and settle the at-the-money short straddle.

The trade sells one put and one call at the strike closest to the current
index level, on the earliest listed expiry whose tenor is at least the
requested holding period.  Each leg is sold at mid minus a 0.1 USD haircut;
the position is held to expiry and settled against the expiry-date index
close.  Profit is the collected premium minus the straddle's intrinsic value
at settlement, and the binary label marks strictly positive profit.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from .data_ingest import MarketDataset, OptionQuote
from .errors import DataError

SELL_HAIRCUT = 0.1  # USD taken off the mid when selling a leg


class UntradableLegError(DataError):
    """Mid minus haircut is not positive; the sample cannot be traded."""


class StraddleBuildError(DataError):
    """No tradable straddle exists for the requested date and tenor."""


@dataclass(frozen=True)
class StraddleTrade:
    trade_date: dt.date
    expiry_date: dt.date
    strike_K1: float
    put_sell_price: float
    call_sell_price: float
    premium_M: float
    days_to_expiry: int
    pm_settled: bool

    def __post_init__(self) -> None:
        if self.premium_M != self.put_sell_price + self.call_sell_price:
            raise DataError("premium must equal put + call sell price")
        if not self.premium_M > 0:
            raise DataError("premium must be positive for a tradable straddle")


@dataclass(frozen=True)
class SettledTrade:
    trade: StraddleTrade
    settlement_value: float  # index level at expiry
    profit: float
    label: int  # 1 = trading beat not trading, 0 otherwise


def select_atm_strike(strikes: list[float], spot: float) -> float:
    """Strike closest to spot; an exact tie goes to the lower strike.

    Strikes must be non-empty and sorted ascending.
    """
    if not strikes:
        raise StraddleBuildError("no strikes available")
    best = strikes[0]
    best_dist = abs(best - spot)
    for strike in strikes[1:]:
        dist = abs(strike - spot)
        if dist < best_dist:
            best, best_dist = strike, dist
    return best


def sell_price(bid: float, ask: float) -> float:
    """Price received for selling one leg: mid minus the 0.1 USD haircut."""
    if not 0 <= bid <= ask:
        raise DataError(f"need 0 <= bid <= ask, got {bid}, {ask}")
    price = (bid + ask) / 2.0 - SELL_HAIRCUT
    if price <= 0:
        raise UntradableLegError(f"sell price {price:.4f} not positive (bid={bid}, ask={ask})")
    return price


def _quotes_for(dataset: MarketDataset, trade_date: dt.date) -> tuple[OptionQuote, ...]:
    quotes = dataset.quotes_by_date.get(trade_date)
    if not quotes:
        raise StraddleBuildError(f"no option quotes on {trade_date}")
    return quotes


def build_straddle(dataset: MarketDataset, trade_date: dt.date, target_tenor: int) -> StraddleTrade:
    """Build the short straddle decided at the close of trade_date.

    Expiry selection: the earliest listed expiry at least target_tenor
    calendar days out.  Strike selection: closest listed strike to the SPX
    close.  When the same strike trades in both settlement styles, a style
    offering both legs is required and PM settlement is preferred.
    """
    quotes = _quotes_for(dataset, trade_date)
    spot = dataset.spx_bar(trade_date).close

    cutoff = trade_date + dt.timedelta(days=target_tenor)
    expiries = sorted({q.expiry_date for q in quotes if q.expiry_date >= cutoff})
    if not expiries:
        raise StraddleBuildError(
            f"{trade_date}: no expiry with tenor >= {target_tenor} days"
        )
    expiry = expiries[0]

    at_expiry = [q for q in quotes if q.expiry_date == expiry]
    strikes = sorted({q.strike for q in at_expiry})
    strike = select_atm_strike(strikes, spot)

    legs: dict[tuple[bool, str], OptionQuote] = {}
    for q in at_expiry:
        if q.strike == strike:
            legs.setdefault((q.pm_settled, q.right), q)
    chosen: tuple[OptionQuote, OptionQuote] | None = None  # (put, call)
    for pm in (True, False):  # prefer PM settlement when both styles are complete
        put, call = legs.get((pm, "P")), legs.get((pm, "C"))
        if put is not None and call is not None:
            chosen = (put, call)
            break
    if chosen is None:
        raise StraddleBuildError(
            f"{trade_date}: missing put or call quote at strike {strike} for {expiry}"
        )
    put_quote, call_quote = chosen

    put_price = sell_price(put_quote.bid, put_quote.ask)
    call_price = sell_price(call_quote.bid, call_quote.ask)
    return StraddleTrade(
        trade_date=trade_date,
        expiry_date=expiry,
        strike_K1=strike,
        put_sell_price=put_price,
        call_sell_price=call_price,
        premium_M=put_price + call_price,
        days_to_expiry=(expiry - trade_date).days,
        pm_settled=put_quote.pm_settled,
    )


def settle_straddle(trade: StraddleTrade, settlement_value: float) -> SettledTrade:
    """Settle at expiry: profit is premium minus both legs' intrinsic value.

    The label is 1 exactly when profit is strictly positive; breaking even is
    not better than staying out.
    """
    if not settlement_value > 0:
        raise DataError(f"settlement value must be positive, got {settlement_value}")
    put_payout = max(0.0, trade.strike_K1 - settlement_value)
    call_payout = max(0.0, settlement_value - trade.strike_K1)
    profit = trade.premium_M - put_payout - call_payout
    return SettledTrade(
        trade=trade,
        settlement_value=settlement_value,
        profit=profit,
        label=1 if profit > 0 else 0,
    )


def settle_from_dataset(dataset: MarketDataset, trade: StraddleTrade) -> SettledTrade:
    """Settle a trade against the expiry-date SPX close held in the dataset."""
    return settle_straddle(trade, dataset.spx_bar(trade.expiry_date).close)
