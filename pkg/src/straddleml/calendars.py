"""Small calendar helpers: month arithmetic and weekly schedules."""

from __future__ import annotations

import calendar
import datetime as dt

from .errors import ConfigError


def add_months(year: int, month: int, n: int) -> tuple[int, int]:
    """Shift a (year, month) pair by n months (n may be negative)."""
    total = (year * 12 + (month - 1)) + n
    return total // 12, total % 12 + 1


def month_end(year: int, month: int) -> dt.date:
    """Last calendar day of the given month."""
    return dt.date(year, month, calendar.monthrange(year, month)[1])


def parse_month(text: str) -> tuple[int, int]:
    """Parse 'YYYY-MM' (or bare 'YYYY', meaning January) into (year, month)."""
    parts = text.strip().split("-")
    try:
        if len(parts) == 1:
            return int(parts[0]), 1
        if len(parts) >= 2:
            year, month = int(parts[0]), int(parts[1])
            if not 1 <= month <= 12:
                raise ValueError(month)
            return year, month
    except ValueError:
        pass
    raise ConfigError(f"cannot parse month {text!r}; expected YYYY-MM")


def parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse date {text!r}; expected YYYY-MM-DD") from exc


def fridays_between(start: dt.date, end: dt.date) -> list[dt.date]:
    """All Fridays with start <= friday <= end, in order."""
    # Monday == 0, Friday == 4
    first = start + dt.timedelta(days=(4 - start.weekday()) % 7)
    out = []
    day = first
    while day <= end:
        out.append(day)
        day += dt.timedelta(days=7)
    return out


def is_third_friday(date: dt.date) -> bool:
    """True for the third Friday of a month (the classic monthly expiry slot)."""
    return date.weekday() == 4 and 15 <= date.day <= 21
