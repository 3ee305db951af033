"""Periodic expressions: parsing, repetition math, window mapping, STN image."""

import random
from fractions import Fraction

import pytest

from tempoguard.errors import (
    EmptyWindow,
    FirstTermNotAll,
    NonDescendingCalendars,
    ParseError,
    UnboundedWindow,
)
from tempoguard.periodic import (
    ALL,
    DateHour,
    TimeWindow,
    displacement,
    granularity,
    parse_date,
    parse_periodic_expression,
    periodic_to_stn,
    periodicity,
    spanned_intervals,
)
from tempoguard.stn import check_consistency, to_distance_graph

F = Fraction

WORKING_HOURS = "all.Weeks + {1,2,3,4,5}.Days + {10,15}.Hours > 4.Hours"
DRIVER = "all.Days + {9}.Hours > 12.Hours"
SYSTEM_ENG = "all.Days + {16}.Hours > 9.Hours"
SECURITY_ENG = "all.Days + {16}.Hours > 12.Hours"

ORIGIN_2015 = DateHour(1, 1, 2015)


def window(begin, end):
    return TimeWindow(parse_date(begin), parse_date(end))


class TestParsing:
    def test_working_hours(self):
        p = parse_periodic_expression(WORKING_HOURS)
        assert p.terms == ((ALL, "Weeks"), (frozenset({1, 2, 3, 4, 5}), "Days"), (frozenset({10, 15}), "Hours"))
        assert p.duration == (4, "Hours")

    def test_driver_expression(self):
        p = parse_periodic_expression(DRIVER)
        assert p.terms == ((ALL, "Days"), (frozenset({9}), "Hours"))
        assert p.duration == (12, "Hours")

    def test_non_descending_calendars(self):
        with pytest.raises(NonDescendingCalendars):
            parse_periodic_expression("{1}.Days + all.Weeks > 1.Hours")

    def test_first_term_must_be_all(self):
        with pytest.raises(FirstTermNotAll):
            parse_periodic_expression("{2}.Days + {9}.Hours > 1.Hours")

    def test_junk_rejected(self):
        for text in ("all.Weeks", "all.Months > 1.Hours", "all.Days + {25}.Hours > 1.Hours", ""):
            with pytest.raises(ParseError):
                parse_periodic_expression(text)

    def test_dates(self):
        d = parse_date("05/01/15")
        assert (d.day, d.month, d.year, d.hour) == (5, 1, 2015, None)
        assert parse_date("02/01/15:03").hour == 3
        with pytest.raises(ParseError):
            parse_date("32/01/15")


class TestRepetition:
    def test_working_hours_characteristics(self):
        p = parse_periodic_expression(WORKING_HOURS)
        assert periodicity(p) == 168
        assert granularity(p) == 4
        assert displacement(p, ORIGIN_2015) == (106, 111, 130, 135, 154, 159, 178, 183, 202, 207)

    def test_driver_characteristics(self):
        p = parse_periodic_expression(DRIVER)
        assert periodicity(p) == 24
        assert granularity(p) == 12
        assert displacement(p, ORIGIN_2015) == (9,)

    def test_always_on_expression(self):
        p = parse_periodic_expression("all.Days > 24.Hours")
        assert periodicity(p) == 24
        assert granularity(p) == 24
        assert displacement(p, ORIGIN_2015) == (1,)

    def test_weekly_anchor_on_a_monday_origin(self):
        # 07/01/30 timeline not needed: an origin that *is* a Monday has no phase
        p = parse_periodic_expression("all.Weeks + {1}.Days + {10}.Hours > 4.Hours")
        assert displacement(p, DateHour(5, 1, 2015)) == (10,)


class TestSpannedIntervals:
    def test_working_hours_first_monday(self):
        p = parse_periodic_expression(WORKING_HOURS)
        assert spanned_intervals(p, window("05/01/15", "05/01/15")) == [
            (F(105), F(109)),
            (F(110), F(114)),
        ]

    def test_case_study_roles(self):
        win = window("01/01/15:01", "02/01/15:03")
        assert spanned_intervals(parse_periodic_expression(DRIVER), win) == [(F(8), F(20))]
        assert spanned_intervals(parse_periodic_expression(SYSTEM_ENG), win) == [(F(15), F(24))]
        assert spanned_intervals(parse_periodic_expression(SECURITY_ENG), win) == [(F(15), F(27))]

    def test_partially_overlapping_interval_dropped(self):
        win = window("01/01/15:01", "01/01/15:20")  # cuts the driver window at 20... keep
        assert spanned_intervals(parse_periodic_expression(DRIVER), win) == [(F(8), F(20))]
        shorter = window("01/01/15:01", "01/01/15:19")
        assert spanned_intervals(parse_periodic_expression(DRIVER), shorter) == []

    def test_empty_window(self):
        with pytest.raises(EmptyWindow):
            TimeWindow(parse_date("05/01/15"), parse_date("03/01/15")).hours()


class TestStnImage:
    def test_working_hours_network(self):
        p = parse_periodic_expression(WORKING_HOURS)
        net = periodic_to_stn(p, window("05/01/15", "05/01/15"))
        idx = net.link_index()
        assert set(net.points) == {"Z", "P1_106S", "P1_106E", "P1_111S", "P1_111E"}
        assert (idx[("Z", "P1_106S")].lower, idx[("Z", "P1_106S")].upper) == (F(105), F(105))
        assert (idx[("P1_106S", "P1_106E")].lower, idx[("P1_106S", "P1_106E")].upper) == (F(4), F(4))
        assert (idx[("Z", "P1_111S")].lower, idx[("Z", "P1_111S")].upper) == (F(110), F(110))
        assert (idx[("P1_111S", "P1_111E")].lower, idx[("P1_111S", "P1_111E")].upper) == (F(4), F(4))
        assert len(net.links) == 4

    def test_system_engineer_network(self):
        p = parse_periodic_expression(SYSTEM_ENG)
        net = periodic_to_stn(p, window("01/01/15:01", "02/01/15:03"))
        idx = net.link_index()
        [iv] = net.intervals
        assert (idx[("Z", iv.start)].lower, idx[("Z", iv.start)].upper) == (F(15), F(15))
        assert (idx[(iv.start, iv.end)].lower, idx[(iv.start, iv.end)].upper) == (F(9), F(9))

    def test_zero_interval_window(self):
        p = parse_periodic_expression(DRIVER)
        net = periodic_to_stn(p, window("01/01/15:01", "01/01/15:05"))
        assert net.points == ("Z",) and net.links == ()

    def test_unbounded_window_rejected(self):
        p = parse_periodic_expression(DRIVER)
        with pytest.raises(UnboundedWindow):
            periodic_to_stn(p, TimeWindow(parse_date("01/01/15"), None))


def random_expression(rng):
    lead = rng.choice(["Weeks", "Days"])
    terms = [(ALL, lead)]
    if lead == "Weeks":
        if rng.random() < 0.8:
            days = frozenset(rng.sample(range(1, 8), rng.randint(1, 2)))
            terms.append((days, "Days"))
            if rng.random() < 0.8:
                terms.append((frozenset(rng.sample(range(1, 25), rng.randint(1, 2))), "Hours"))
    else:
        if rng.random() < 0.9:
            terms.append((frozenset(rng.sample(range(1, 25), rng.randint(1, 2))), "Hours"))
    parts = []
    for values, cal in terms:
        parts.append("all." + cal if values == ALL else "{" + ",".join(map(str, sorted(values))) + "}." + cal)
    r = rng.randint(1, 12)
    return parse_periodic_expression(" + ".join(parts) + f" > {r}.Hours")


def random_window(rng):
    day = rng.randint(1, 20)
    span = rng.randint(0, 6)
    h1 = rng.randint(1, 24)
    h2 = rng.randint(1, 24)
    begin = DateHour(day, 1, 2015, h1)
    end = DateHour(day + span, 1, 2015, h2 if span else max(h1, h2))
    return TimeWindow(begin, end)


class TestSingleSolutionProperty:
    def test_randomized_networks_have_exactly_one_solution(self):
        rng = random.Random(168)
        checked = 0
        for _ in range(200):
            p = random_expression(rng)
            win = random_window(rng)
            net = periodic_to_stn(p, win)
            report = check_consistency(net)
            assert report.consistent
            for point, (lo, hi) in report.ranges.items():
                assert lo == hi, f"{point} range [{lo},{hi}] not a singleton for {p}"
            g = to_distance_graph(net)
            for (u, v), w in g.edges.items():
                assert g.edges[(v, u)] == -w
            checked += 1
        assert checked == 200

    def test_interval_widths_equal_granularity(self):
        rng = random.Random(42)
        for _ in range(50):
            p = random_expression(rng)
            win = random_window(rng)
            for lo, hi in spanned_intervals(p, win):
                assert hi - lo == granularity(p)

    def test_fragment_expressions_span_disjoint_intervals(self):
        # non-interference: one expression's intervals never overlap
        texts = [WORKING_HOURS, DRIVER, SYSTEM_ENG, SECURITY_ENG]
        win = window("01/01/15:01", "31/01/15:24")
        for text in texts:
            ivs = spanned_intervals(parse_periodic_expression(text), win)
            assert len(ivs) > 1
            for (lo1, hi1), (lo2, hi2) in zip(ivs, ivs[1:]):
                assert hi1 <= lo2, (text, (lo1, hi1), (lo2, hi2))
