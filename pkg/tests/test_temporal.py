import datetime as dt
import itertools

import pytest
from hypothesis import given, strategies as st

from dpdeid.temporal import (FormatDescriptor, FutureDateError, Granularity, Kind, LocaleConfig,
                             TemporalEntity, TemporalError, TemporalParseError, TemporalRangeError,
                             parse_temporal, render_temporal, temporal_distance)

REF = dt.date(2020, 12, 31)
DMY = LocaleConfig("fr", "dmy", REF)
MDY = LocaleConfig("en", "mdy", REF)


def days_from_civil(y, m, d):
    """Days since 1970-01-01, by the era/day-of-era construction (no datetime)."""
    y -= m <= 2
    era = (y if y >= 0 else y - 399) // 400
    yoe = y - era * 400
    doy = (153 * (m + (-3 if m > 2 else 9)) + 2) // 5 + d - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def test_day_count_oracle_example():
    assert days_from_civil(2020, 12, 31) - days_from_civil(2020, 2, 12) == 323
    ent = parse_temporal("12/02/2020", "DATE", DMY)
    assert ent.kind is Kind.ABSOLUTE_DATE
    assert ent.granularity is Granularity.DAY
    assert ent.magnitude == 323
    assert ent.format.pattern == "numeric"


@given(st.dates(min_value=dt.date(1900, 1, 1), max_value=REF))
def test_day_count_matches_oracle(day):
    ent = parse_temporal(day.isoformat(), "DATE", DMY)
    assert ent.magnitude == days_from_civil(2020, 12, 31) - days_from_civil(day.year, day.month, day.day)


def test_reference_date_is_zero():
    assert parse_temporal("31/12/2020", "DATE", DMY).magnitude == 0


def test_age_forty_years():
    ent = parse_temporal("40 years", "AGE", MDY)
    assert (ent.kind, ent.magnitude, ent.granularity) == (Kind.RELATIVE, 40, Granularity.YEAR)


def test_day_month_order_follows_config():
    assert parse_temporal("12/02/2020", "DATE", DMY).magnitude == 323
    # read as December 2nd
    assert parse_temporal("12/02/2020", "DATE", MDY).magnitude == 29


def test_future_date():
    with pytest.raises(FutureDateError):
        parse_temporal("01/01/2021", "DATE", DMY)


def test_unsupported_suggests_pattern():
    with pytest.raises(TemporalParseError) as exc:
        parse_temporal("13/7", "DATE", DMY)
    assert exc.value.nearest
    assert "13/7" not in str(exc.value)


def test_invalid_calendar_date():
    with pytest.raises(TemporalParseError):
        parse_temporal("31/02/2020", "DATE", DMY)


def test_two_digit_year_pivot():
    assert parse_temporal("12/02/20", "DATE", DMY).magnitude == 323
    ent = parse_temporal("12/02/85", "DATE", DMY)
    assert REF - dt.timedelta(days=ent.magnitude) == dt.date(1985, 2, 12)


def test_render_long_form_two_days_later():
    ent = parse_temporal("February 26, 2020", "DATE", MDY)
    assert render_temporal(ent.with_magnitude(ent.magnitude - 2), REF) == "February 28, 2020"


def test_render_magnitude_zero():
    ent = parse_temporal("03/04/2019", "DATE", DMY)
    assert render_temporal(ent.with_magnitude(0), REF) == "31/12/2020"


def test_render_age():
    ent = parse_temporal("40 years", "AGE", MDY)
    assert render_temporal(ent.with_magnitude(42), REF) == "42 years"
    ent = parse_temporal("40 ans", "AGE", DMY)
    assert render_temporal(ent.with_magnitude(42), REF) == "42 ans"
    assert render_temporal(ent.with_magnitude(1), REF) == "1 an"


def test_render_before_year_one():
    ent = parse_temporal("2020-01-01", "DATE", DMY)
    with pytest.raises(TemporalRangeError):
        render_temporal(ent.with_magnitude(10 ** 6), REF)


def test_absolute_dates_are_days_only():
    with pytest.raises(TemporalError):
        TemporalEntity(Kind.ABSOLUTE_DATE, 3, Granularity.YEAR, FormatDescriptor("iso"))
    with pytest.raises(TemporalError):
        TemporalEntity(Kind.RELATIVE, -1, Granularity.YEAR, FormatDescriptor("duration"))


ROUND_TRIP = [
    ("12/02/2020", DMY), ("1/2/2020", DMY), ("01.02.2019", DMY), ("5-11-2018", DMY), ("12/02/20", DMY),
    ("02/12/2020", MDY), ("2/12/2020", MDY), ("11/05/18", MDY),
    ("2020-02-12", DMY), ("1999-12-31", MDY),
    ("February 26, 2020", MDY), ("Feb 26, 2020", MDY), ("Feb. 6, 2020", MDY), ("FEBRUARY 26, 2020", MDY),
    ("26 February 2020", MDY), ("26 février 2020", DMY), ("3 mars 2019", DMY), ("03 Août 2017", DMY),
    ("40 years", MDY), ("1 year", MDY), ("40 ans", DMY), ("1 an", DMY), ("18 mois", DMY),
    ("3 weeks", MDY), ("2 semaines", DMY), ("10 days", MDY), ("5 jours", DMY), ("6 months", MDY),
    ("10 years ago", MDY), ("il y a 10 ans", DMY), ("il y a 3 semaines", DMY), ("2 months ago", MDY),
]


@pytest.mark.parametrize("surface,locale", ROUND_TRIP)
def test_round_trip(surface, locale):
    ent = parse_temporal(surface, "DATE", locale)
    assert render_temporal(ent, locale.reference_date) == surface


@pytest.mark.parametrize("surface,locale", ROUND_TRIP)
def test_format_class_kept_after_shift(surface, locale):
    ent = parse_temporal(surface, "DATE", locale)
    shifted = ent.with_magnitude(ent.magnitude + 37)
    again = parse_temporal(render_temporal(shifted, REF), "DATE", locale)
    assert again.format.pattern == ent.format.pattern
    if ent.format.year_digits == 4:
        assert again.magnitude == shifted.magnitude


def _ent(n, gran=Granularity.YEAR):
    return TemporalEntity(Kind.RELATIVE, n, gran, FormatDescriptor("duration", unit_stem="year"))


def test_distance_examples():
    assert temporal_distance(_ent(40), _ent(42)) == 2
    assert temporal_distance(_ent(7), _ent(7)) == 0
    assert temporal_distance(_ent(323, Granularity.DAY), _ent(309, Granularity.DAY)) == 14 == 323 - 309


def test_distance_units_must_match():
    with pytest.raises(TemporalError):
        temporal_distance(_ent(1, Granularity.DAY), _ent(1, Granularity.YEAR))


def test_distance_is_a_metric_on_small_grid():
    grid = range(0, 12)
    for a, b, c in itertools.product(grid, repeat=3):
        ea, eb, ec = _ent(a), _ent(b), _ent(c)
        dab = temporal_distance(ea, eb)
        assert dab >= 0
        assert (dab == 0) == (a == b)
        assert dab == temporal_distance(eb, ea)
        assert temporal_distance(ea, ec) <= dab + temporal_distance(eb, ec)
