"""
Dates and ages as durations.

An absolute date becomes the number of days between it and a reference
date; an age or "N units ago" keeps its own unit. The distance between
two temporal values is the absolute difference of their magnitudes in
that shared unit. Every parsed value remembers how it was written so
that a noised magnitude can be rendered back in the same surface form.
"""

from __future__ import annotations

import datetime as dt
import difflib
import enum
import re
from dataclasses import dataclass, field, replace
from typing import Optional


class TemporalError(ValueError):
    pass


class TemporalParseError(TemporalError):
    def __init__(self, surface: str, nearest: Optional[str]):
        self.nearest = nearest
        hint = f"; nearest supported pattern: {nearest}" if nearest else ""
        super().__init__(f"unsupported temporal form{hint}")
        # surface is kept on the exception for callers but left out of the message
        self.surface = surface


class FutureDateError(TemporalError):
    pass


class TemporalRangeError(TemporalError):
    pass


class Granularity(str, enum.Enum):
    DAY = "DAY"
    WEEK = "WEEK"
    MONTH = "MONTH"
    YEAR = "YEAR"


class Kind(str, enum.Enum):
    ABSOLUTE_DATE = "ABSOLUTE_DATE"
    RELATIVE = "RELATIVE"


@dataclass(frozen=True)
class LocaleConfig:
    locale: str = "fr"
    day_month_order: str = "dmy"
    reference_date: dt.date = field(default_factory=dt.date.today)

    def __post_init__(self):
        if self.locale not in ("fr", "en"):
            raise ValueError(f"unsupported locale {self.locale!r} (fr or en)")
        if self.day_month_order not in ("dmy", "mdy"):
            raise ValueError(f"day_month_order must be 'dmy' or 'mdy', got {self.day_month_order!r}")
        if isinstance(self.reference_date, str):
            object.__setattr__(self, "reference_date", dt.date.fromisoformat(self.reference_date))


@dataclass(frozen=True)
class FormatDescriptor:
    """How a temporal value was written.

    ``pattern`` is one of ``numeric``, ``iso``, ``long_mdy``, ``long_dmy``,
    ``duration`` (bare "40 years") or ``ago`` ("10 years ago").
    The remaining fields are rendering details; unused ones stay at defaults.
    """

    pattern: str
    language: str = "en"
    dmy: bool = True
    sep: str = "/"
    day_pad: bool = True
    month_pad: bool = True
    year_digits: int = 4
    month_style: str = "full"  # full | abbr | abbr_dot
    word_case: str = "title"  # title | lower | upper; month or unit word
    unit_stem: str = ""


@dataclass(frozen=True)
class TemporalEntity:
    kind: Kind
    magnitude: int
    granularity: Granularity
    format: FormatDescriptor

    def __post_init__(self):
        if self.magnitude < 0:
            raise TemporalError("magnitude must be non-negative")
        if self.kind is Kind.ABSOLUTE_DATE and self.granularity is not Granularity.DAY:
            raise TemporalError("absolute dates are measured in days")

    def with_magnitude(self, magnitude: int) -> "TemporalEntity":
        return replace(self, magnitude=int(magnitude))


# --- vocabularies -----------------------------------------------------------

MONTHS = {
    "en": ["January", "February", "March", "April", "May", "June", "July",
           "August", "September", "October", "November", "December"],
    "fr": ["janvier", "février", "mars", "avril", "mai", "juin", "juillet",
           "août", "septembre", "octobre", "novembre", "décembre"],
}
_EN_ABBR = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]

# (stem, singular, plural, granularity); matched on the lowercased word
_UNITS = {
    "en": [
        ("year", "year", "years", Granularity.YEAR),
        ("month", "month", "months", Granularity.MONTH),
        ("week", "week", "weeks", Granularity.WEEK),
        ("day", "day", "days", Granularity.DAY),
    ],
    "fr": [
        ("an", "an", "ans", Granularity.YEAR),
        ("année", "année", "années", Granularity.YEAR),
        ("mois", "mois", "mois", Granularity.MONTH),
        ("semaine", "semaine", "semaines", Granularity.WEEK),
        ("jour", "jour", "jours", Granularity.DAY),
    ],
}


def _month_lookup():
    table = {}
    for lang, names in MONTHS.items():
        for i, name in enumerate(names, 1):
            table[name.lower()] = (i, lang, "full")
    for i, name in enumerate(_EN_ABBR, 1):
        table.setdefault(name.lower(), (i, "en", "abbr"))
    table["sept"] = (9, "en", "abbr")
    return table


_MONTH_LOOKUP = _month_lookup()


def _unit_lookup():
    table = {}
    for lang, rows in _UNITS.items():
        for stem, sing, plur, gran in rows:
            table[sing] = (lang, stem, gran)
            table[plur] = (lang, stem, gran)
    return table


_UNIT_LOOKUP = _unit_lookup()

_NUMERIC_RE = re.compile(r"^(\d{1,2})([/.\-])(\d{1,2})\2(\d{4}|\d{2})$")
_ISO_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_LONG_MDY_RE = re.compile(r"^([A-Za-zÀ-ÿ]+)(\.?) (\d{1,2}), (\d{4})$")
_LONG_DMY_RE = re.compile(r"^(\d{1,2}) ([A-Za-zÀ-ÿ]+)(\.?) (\d{4})$")
_DURATION_RE = re.compile(r"^(\d{1,4}) ([A-Za-zÀ-ÿ]+)$")
_AGO_EN_RE = re.compile(r"^(\d{1,4}) ([A-Za-z]+) ago$", re.IGNORECASE)
_AGO_FR_RE = re.compile(r"^il y a (\d{1,4}) ([A-Za-zÀ-ÿ]+)$", re.IGNORECASE)

# shape exemplars used to suggest the closest supported pattern on failure
_EXEMPLARS = {
    "numeric slash date (12/02/2020)": "12/02/2020",
    "ISO date (2020-02-12)": "2020-02-12",
    "long month-first date (February 26, 2020)": "February 26, 2020",
    "long day-first date (26 février 2020)": "26 février 2020",
    "bare duration (40 years / 40 ans)": "40 years",
    "relative phrase (10 years ago / il y a 10 ans)": "10 years ago",
}


def _shape(s: str) -> str:
    return re.sub(r"[^\W\d_]", "a", re.sub(r"\d", "9", s))


def _nearest_pattern(surface: str) -> str:
    shapes = {_shape(v): k for k, v in _EXEMPLARS.items()}
    best = difflib.get_close_matches(_shape(surface), list(shapes), n=1, cutoff=0.0)
    return shapes[best[0]] if best else None


def _case_of(word: str) -> str:
    if word.isupper() and len(word) > 1:
        return "upper"
    if word[:1].isupper():
        return "title"
    return "lower"


def _apply_case(word: str, case: str) -> str:
    if case == "upper":
        return word.upper()
    if case == "title":
        return word[:1].upper() + word[1:]
    return word.lower()


def _expand_year(two_digits: int, reference: dt.date) -> int:
    year = reference.year - reference.year % 100 + two_digits
    return year if year <= reference.year else year - 100


def _absolute(day: dt.date, reference: dt.date, fmt: FormatDescriptor) -> TemporalEntity:
    days = (reference - day).days
    if days < 0:
        raise FutureDateError(f"date is {-days} days after the reference date")
    return TemporalEntity(Kind.ABSOLUTE_DATE, days, Granularity.DAY, fmt)


def _make_date(year: int, month: int, day: int, surface: str) -> dt.date:
    try:
        return dt.date(year, month, day)
    except ValueError:
        raise TemporalParseError(surface, _nearest_pattern(surface)) from None


def _relative(number: str, word: str, pattern: str, surface: str) -> TemporalEntity:
    info = _UNIT_LOOKUP.get(word.lower())
    if info is None:
        raise TemporalParseError(surface, _nearest_pattern(surface))
    lang, stem, gran = info
    if pattern == "ago":
        lang = "fr" if surface.lower().startswith("il y a") else "en"
    fmt = FormatDescriptor(pattern, language=lang, unit_stem=stem, word_case=_case_of(word))
    return TemporalEntity(Kind.RELATIVE, int(number), gran, fmt)


def parse_temporal(surface: str, label="DATE", locale: Optional[LocaleConfig] = None,
                   reference_date: Optional[dt.date] = None) -> TemporalEntity:
    """Parse a date or age surface form into a TemporalEntity.

    Numeric dates are read in the configured day-month order; there is no
    guessing. Raises TemporalParseError for unsupported forms and
    FutureDateError for absolute dates after the reference date.
    """
    locale = locale or LocaleConfig()
    ref = reference_date or locale.reference_date
    s = surface.strip()

    m = _AGO_EN_RE.match(s) or _AGO_FR_RE.match(s)
    if m:
        return _relative(m.group(1), m.group(2), "ago", s)

    m = _ISO_RE.match(s)
    if m:
        day = _make_date(int(m.group(1)), int(m.group(2)), int(m.group(3)), s)
        return _absolute(day, ref, FormatDescriptor("iso", language=locale.locale, sep="-"))

    m = _NUMERIC_RE.match(s)
    if m:
        a, sep, b, y = m.groups()
        dmy = locale.day_month_order == "dmy"
        d_str, m_str = (a, b) if dmy else (b, a)
        year = int(y) if len(y) == 4 else _expand_year(int(y), ref)
        day = _make_date(year, int(m_str), int(d_str), s)
        fmt = FormatDescriptor("numeric", language=locale.locale, dmy=dmy, sep=sep,
                               day_pad=len(d_str) == 2, month_pad=len(m_str) == 2,
                               year_digits=len(y))
        return _absolute(day, ref, fmt)

    m = _LONG_MDY_RE.match(s)
    if m and m.group(1).lower() in _MONTH_LOOKUP:
        month, lang, style = _MONTH_LOOKUP[m.group(1).lower()]
        if m.group(2):
            style = "abbr_dot"
        day = _make_date(int(m.group(4)), month, int(m.group(3)), s)
        fmt = FormatDescriptor("long_mdy", language=lang, dmy=False, month_style=style,
                               word_case=_case_of(m.group(1)), day_pad=False)
        return _absolute(day, ref, fmt)

    m = _LONG_DMY_RE.match(s)
    if m and m.group(2).lower() in _MONTH_LOOKUP:
        month, lang, style = _MONTH_LOOKUP[m.group(2).lower()]
        if m.group(3):
            style = "abbr_dot"
        day = _make_date(int(m.group(4)), month, int(m.group(1)), s)
        fmt = FormatDescriptor("long_dmy", language=lang, dmy=True, month_style=style,
                               word_case=_case_of(m.group(2)), day_pad=len(m.group(1)) == 2)
        return _absolute(day, ref, fmt)

    m = _DURATION_RE.match(s)
    if m:
        return _relative(m.group(1), m.group(2), "duration", s)

    raise TemporalParseError(surface, _nearest_pattern(s))


def _unit_word(fmt: FormatDescriptor, n: int) -> str:
    for stem, sing, plur, _ in _UNITS[fmt.language]:
        if stem == fmt.unit_stem:
            plural = n >= 2 if fmt.language == "fr" else n != 1
            return _apply_case(plur if plural else sing, fmt.word_case)
    raise TemporalError(f"unknown unit stem {fmt.unit_stem!r}")


def _month_word(fmt: FormatDescriptor, month: int) -> str:
    if fmt.month_style == "full":
        word = MONTHS[fmt.language][month - 1]
    else:
        word = _EN_ABBR[month - 1]
    word = _apply_case(word, fmt.word_case)
    if fmt.month_style == "abbr_dot":
        word += "."
    return word


def render_temporal(entity: TemporalEntity, reference_date: dt.date) -> str:
    """Render an entity back to text using its stored format."""
    fmt = entity.format
    n = entity.magnitude
    if entity.kind is Kind.RELATIVE:
        unit = _unit_word(fmt, n)
        if fmt.pattern == "ago":
            return f"il y a {n} {unit}" if fmt.language == "fr" else f"{n} {unit} ago"
        return f"{n} {unit}"

    try:
        day = reference_date - dt.timedelta(days=n)
    except OverflowError:
        raise TemporalRangeError(f"{n} days before {reference_date} is before year 1") from None

    if fmt.pattern == "iso":
        return day.isoformat()
    if fmt.pattern == "numeric":
        d = f"{day.day:02d}" if fmt.day_pad else str(day.day)
        mo = f"{day.month:02d}" if fmt.month_pad else str(day.month)
        y = f"{day.year:04d}" if fmt.year_digits == 4 else f"{day.year % 100:02d}"
        first, second = (d, mo) if fmt.dmy else (mo, d)
        return f"{first}{fmt.sep}{second}{fmt.sep}{y}"
    if fmt.pattern == "long_mdy":
        return f"{_month_word(fmt, day.month)} {day.day}, {day.year}"
    if fmt.pattern == "long_dmy":
        d = f"{day.day:02d}" if fmt.day_pad else str(day.day)
        return f"{d} {_month_word(fmt, day.month)} {day.year}"
    raise TemporalError(f"no renderer for pattern {fmt.pattern!r}")


def temporal_distance(a: TemporalEntity, b: TemporalEntity) -> float:
    if a.granularity is not b.granularity:
        raise TemporalError(f"cannot compare {a.granularity.value} with {b.granularity.value}")
    return float(abs(a.magnitude - b.magnitude))
