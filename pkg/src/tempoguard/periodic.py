"""Periodic time expressions, calendar windows, and their STN image.

An expression  all.C1 + O2.C2 + ... + On.Cn > r.Cd  enumerates repeating
enabling intervals: the O_i pick granule offsets inside the enclosing
calendar, the duration r.Cd fixes each interval's width. Relative to a
timeline whose hour 0 is 00:00 of an origin date, every interval has the
form [p*n + z - 1, p*n + z - 1 + g] where p is the periodicity, g the
granularity, and z ranges over the displacement set.

Weekly expressions anchor n = 0 at the first Monday 00:00 at or after the
origin (Monday is day 1), so displacements carry the origin's weekday
phase; daily and hourly expressions are already aligned with the origin.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import (
    EmptyWindow,
    FirstTermNotAll,
    NonDescendingCalendars,
    ParseError,
    UnboundedWindow,
)
from .stn import RequirementLink, Stn, TimePointId, make_stn

CALENDAR_HOURS = {"Hours": 1, "Days": 24, "Weeks": 168}

ALL = "all"


@dataclass(frozen=True)
class DateHour:
    """dd/mm/yy date, optionally naming the hh-th hour (1..24) of that day."""

    day: int
    month: int
    year: int
    hour: int | None = None

    def date(self) -> _dt.date:
        return _dt.date(self.year, self.month, self.day)

    def __str__(self):
        base = f"{self.day:02d}/{self.month:02d}/{self.year % 100:02d}"
        return base if self.hour is None else f"{base}:{self.hour:02d}"


_DATE_RE = re.compile(r"^(\d{2})/(\d{2})/(\d{2})(?::(\d{2}))?$")


def parse_date(text: str) -> DateHour:
    m = _DATE_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad date expression {text!r}", "date")
    day, month, yy, hour = m.groups()
    d = DateHour(int(day), int(month), 2000 + int(yy), int(hour) if hour else None)
    try:
        d.date()
    except ValueError as exc:
        raise ParseError(str(exc), "date") from exc
    if d.hour is not None and not (1 <= d.hour <= 24):
        raise ParseError(f"hour {d.hour} outside 01..24", "date")
    return d


@dataclass(frozen=True)
class TimeWindow:
    """Finite applicability window; hour 0 is 00:00 of the origin date.

    A begin without :hh means its first hour, an end without :hh its last.
    """

    begin: DateHour
    end: DateHour | None  # None marks an unbounded upper end
    origin: DateHour | None = None

    def origin_date(self) -> _dt.date:
        if self.origin is not None:
            return self.origin.date()
        return _dt.date(self.begin.year, 1, 1)

    def hours(self) -> tuple[Fraction, Fraction]:
        if self.end is None:
            raise UnboundedWindow("window upper bound must be finite")
        base = self.origin_date()
        lo_day = (self.begin.date() - base).days * 24
        hi_day = (self.end.date() - base).days * 24
        lo = Fraction(lo_day + (self.begin.hour or 1) - 1)
        hi = Fraction(hi_day + (self.end.hour or 24))
        if hi < lo or lo < 0:
            raise EmptyWindow(f"window [{self.begin},{self.end}] is empty on this timeline")
        return lo, hi

    def clip(self, begin: DateHour, end: DateHour | None) -> "TimeWindow":
        """Intersect with another date interval, keeping this window's origin."""
        base = self.origin_date()

        def key(d: DateHour, first_hour: bool):
            return (d.date() - base).days * 24 + (d.hour or (1 if first_hour else 24))

        new_begin = self.begin if key(begin, True) <= key(self.begin, True) else begin
        if end is not None and (self.end is None or key(end, False) < key(self.end, False)):
            new_end = end
        else:
            new_end = self.end
        return TimeWindow(new_begin, new_end, self.origin or DateHour(1, 1, self.begin.year))


@dataclass(frozen=True)
class PeriodicExpression:
    """Ordered calendar terms plus an interval duration (r granules of C_d)."""

    terms: tuple[tuple[object, str], ...]  # (set of naturals or ALL, calendar)
    duration: tuple[int, str]

    def __post_init__(self):
        if not self.terms:
            raise ParseError("expression needs at least one term", "terms")
        prev = None
        for _, cal in self.terms:
            if cal not in CALENDAR_HOURS:
                raise ParseError(f"unknown calendar {cal!r}", "terms")
            if prev is not None and CALENDAR_HOURS[cal] >= CALENDAR_HOURS[prev]:
                raise NonDescendingCalendars(f"{cal} is not finer than {prev}")
            prev = cal
        if self.terms[0][0] != ALL:
            raise FirstTermNotAll(f"first term must be 'all', got {self.terms[0][0]}")
        for (_, parent), (values, cal) in zip(self.terms, self.terms[1:]):
            ratio = CALENDAR_HOURS[parent] // CALENDAR_HOURS[cal]
            if values != ALL and any(not (1 <= v <= ratio) for v in values):
                raise ParseError(f"offsets {sorted(values)} outside 1..{ratio} for {cal} in {parent}")
        r, cal_d = self.duration
        if cal_d not in CALENDAR_HOURS:
            raise ParseError(f"unknown calendar {cal_d!r}", "duration")
        if CALENDAR_HOURS[cal_d] > CALENDAR_HOURS[self.terms[-1][1]]:
            raise NonDescendingCalendars(f"duration calendar {cal_d} coarser than {self.terms[-1][1]}")
        if r < 1:
            raise ParseError("duration must be at least one granule", "duration")


_TERM_RE = re.compile(r"^(all|\{\s*\d+(?:\s*,\s*\d+)*\s*\}|\d+)\s*[.·]\s*(\w+)$")


def _parse_term(text: str, where: str) -> tuple[object, str]:
    m = _TERM_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad term {text!r}", where)
    values, cal = m.groups()
    if values == ALL:
        return ALL, cal
    if values.startswith("{"):
        return frozenset(int(v) for v in values.strip("{} ").split(",")), cal
    return frozenset({int(values)}), cal


def parse_periodic_expression(text: str) -> PeriodicExpression:
    """Parse the surface syntax, e.g. "all.Weeks + {1,2,3,4,5}.Days + {10,15}.Hours > 4.Hours"."""
    parts = re.split(r">|▷", text)
    if len(parts) != 2:
        raise ParseError("expected exactly one '>' separating terms from duration", "expression")
    head, tail = parts
    terms = tuple(_parse_term(t, "terms") for t in head.split("+"))
    dur_values, dur_cal = _parse_term(tail, "duration")
    if dur_values == ALL or len(dur_values) != 1:
        raise ParseError(f"duration must be a single number, got {tail.strip()!r}", "duration")
    return PeriodicExpression(terms, (next(iter(dur_values)), dur_cal))


def periodicity(p: PeriodicExpression) -> int:
    """Hours after which the expression repeats (hours of the leading calendar)."""
    return CALENDAR_HOURS[p.terms[0][1]]


def granularity(p: PeriodicExpression) -> int:
    """Width of each spanned interval, in hours."""
    r, cal = p.duration
    return r * CALENDAR_HOURS[cal]


def _anchor_hours(p: PeriodicExpression, origin: _dt.date) -> int:
    if p.terms[0][1] == "Weeks":
        return ((7 - origin.weekday()) % 7) * 24
    return 0


def displacement(p: PeriodicExpression, origin: DateHour | _dt.date) -> tuple[int, ...]:
    """Starting offsets z of the spanned intervals relative to the origin's timeline."""
    base = origin.date() if isinstance(origin, DateHour) else origin
    anchor = _anchor_hours(p, base)
    choice_sets = []
    prev_cal = p.terms[0][1]
    for values, cal in p.terms[1:]:
        ratio = CALENDAR_HOURS[prev_cal] // CALENDAR_HOURS[cal]
        offsets = range(1, ratio + 1) if values == ALL else sorted(values)
        choice_sets.append([(o - 1) * CALENDAR_HOURS[cal] for o in offsets])
        prev_cal = cal
    zs = sorted({anchor + sum(combo) + 1 for combo in product(*choice_sets)})
    return tuple(zs)


def spanned_intervals(p: PeriodicExpression, window: TimeWindow) -> list[tuple[Fraction, Fraction]]:
    """All intervals [p*n+z-1, p*n+z-1+g] fully contained in the window, ascending."""
    return [(lo, hi) for _, _, lo, hi in _spanned(p, window)]


def _spanned(p: PeriodicExpression, window: TimeWindow):
    win_lo, win_hi = window.hours()
    per = periodicity(p)
    g = granularity(p)
    out = []
    for z in displacement(p, window.origin_date()):
        n = 0
        while True:
            lo = Fraction(per * n + z - 1)
            if lo > win_hi:
                break
            hi = lo + g
            if lo >= win_lo and hi <= win_hi:
                out.append((n, z, lo, hi))
            n += 1
    out.sort(key=lambda item: (item[2], item[1]))
    return out


@dataclass(frozen=True)
class IntervalPoints:
    """STN point pair standing for one spanned interval."""

    index: int  # n+1, the occurrence count for this displacement
    z: int
    start: TimePointId
    end: TimePointId
    lo: Fraction
    hi: Fraction


@dataclass(frozen=True)
class EnablingStn(Stn):
    intervals: tuple[IntervalPoints, ...] = ()


def periodic_to_stn(p: PeriodicExpression, window: TimeWindow) -> EnablingStn:
    """Map an expression bounded by a finite window to an STN.

    Each interval [lo,hi] contributes Z ->[lo,lo] start and
    start ->[hi-lo,hi-lo] end, so the network admits exactly one solution.
    """
    points: list[TimePointId] = ["Z"]
    links: list[RequirementLink] = []
    meta: list[IntervalPoints] = []
    for n, z, lo, hi in _spanned(p, window):
        s = f"P{n + 1}_{z}S"
        e = f"P{n + 1}_{z}E"
        points += [s, e]
        links.append(RequirementLink("Z", s, lo, lo))
        links.append(RequirementLink(s, e, hi - lo, hi - lo))
        meta.append(IntervalPoints(n + 1, z, s, e, lo, hi))
    base = make_stn(points, links)
    return EnablingStn(base.points, base.links, base.origin, tuple(meta))
