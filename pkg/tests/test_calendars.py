import datetime as dt

import pytest

from straddleml.calendars import (
    add_months,
    fridays_between,
    is_third_friday,
    month_end,
    parse_date,
    parse_month,
)
from straddleml.errors import ConfigError


def test_add_months_forward_and_wrap():
    assert add_months(2014, 2, 1) == (2014, 3)
    assert add_months(2014, 11, 3) == (2015, 2)
    assert add_months(2014, 1, 12) == (2015, 1)
    assert add_months(2019, 12, 1) == (2020, 1)


def test_add_months_backward():
    assert add_months(2014, 2, -1) == (2014, 1)
    assert add_months(2014, 2, -2) == (2013, 12)
    assert add_months(2014, 1, -13) == (2012, 12)
    assert add_months(2014, 2, 0) == (2014, 2)


def test_month_end_handles_leap_years():
    assert month_end(2020, 2) == dt.date(2020, 2, 29)
    assert month_end(2019, 2) == dt.date(2019, 2, 28)
    assert month_end(2100, 2) == dt.date(2100, 2, 28)
    assert month_end(2019, 12) == dt.date(2019, 12, 31)
    assert month_end(2019, 4) == dt.date(2019, 4, 30)


def test_parse_month():
    assert parse_month("2014-02") == (2014, 2)
    assert parse_month(" 2014-11 ") == (2014, 11)
    assert parse_month("2014") == (2014, 1)


@pytest.mark.parametrize("bad", ["2014-13", "2014-00", "abcd-02", "2014-xy", ""])
def test_parse_month_rejects_garbage(bad):
    with pytest.raises(ConfigError):
        parse_month(bad)


def test_parse_date():
    assert parse_date("2019-09-01") == dt.date(2019, 9, 1)
    with pytest.raises(ConfigError):
        parse_date("2019-02-30")
    with pytest.raises(ConfigError):
        parse_date("not-a-date")


def test_fridays_between():
    fridays = fridays_between(dt.date(2020, 3, 1), dt.date(2020, 3, 31))
    assert fridays == [
        dt.date(2020, 3, 6),
        dt.date(2020, 3, 13),
        dt.date(2020, 3, 20),
        dt.date(2020, 3, 27),
    ]
    assert all(d.weekday() == 4 for d in fridays)


def test_fridays_between_inclusive_bounds():
    friday = dt.date(2020, 3, 6)
    assert fridays_between(friday, friday) == [friday]
    assert fridays_between(friday + dt.timedelta(days=1), friday + dt.timedelta(days=6)) == []


def test_is_third_friday():
    assert is_third_friday(dt.date(2020, 3, 20))
    assert is_third_friday(dt.date(2019, 9, 20))
    assert not is_third_friday(dt.date(2020, 3, 13))
    assert not is_third_friday(dt.date(2020, 3, 27))
    # a Wednesday inside the third-week day range
    assert not is_third_friday(dt.date(2020, 3, 18))
