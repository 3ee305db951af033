"""STNU mapping, reduction rules, DC checking, and oracle agreement."""

import random
from fractions import Fraction

import pytest

from tempoguard import (
    INF,
    ContingentLink,
    RequirementLink,
    allmax_projection,
    apply_reduction_round,
    brute_force_dc_oracle,
    check_dynamic_controllability,
    make_stnu,
    project,
    to_labeled_distance_graph,
)
from tempoguard.errors import DurationOutOfBounds, IncompleteSituation, InstanceTooLarge, MalformedNetwork
from tempoguard.stn import check_consistency
from tempoguard.stnu import LabeledGraph

F = Fraction


def req(src, dst, lo, hi):
    return RequirementLink(src, dst, lo if lo == INF else F(lo), hi if hi == INF else F(hi))


def narrow_interval_fragment(j=2, k=4, x=4, y=5):
    """One task bracketed by a fixed enabling interval of width k."""
    return make_stnu(
        ["Z", "PS", "PE", "A", "C"],
        [
            req("Z", "PS", j, j),
            req("PS", "PE", k, k),
            req("PS", "A", 0, INF),
            req("C", "PE", 0, INF),
        ],
        [ContingentLink("A", "C", F(x), F(y))],
    )


class TestLabeledGraph:
    def test_contingent_yields_four_edges(self):
        stnu = make_stnu(["Z", "A", "C"], [], [ContingentLink("A", "C", F(4), F(5))])
        g = to_labeled_distance_graph(stnu)
        assert g.edges[("A", "C", None)] == 5
        assert g.edges[("C", "A", None)] == -4
        assert g.edges[("A", "C", ("lc", "C"))] == 4
        assert g.edges[("C", "A", ("uc", "C"))] == -5

    def test_no_contingents_matches_plain_distance_graph(self):
        stnu = make_stnu(["Z", "X", "Y"], [req("X", "Y", 1, 3)], [])
        g = to_labeled_distance_graph(stnu)
        assert set(g.edges) == {("X", "Y", None), ("Y", "X", None)}

    def test_fragment_labeled_graph(self):
        g = to_labeled_distance_graph(narrow_interval_fragment(j=2, k=4, x=4, y=5))
        expected = {
            ("Z", "PS", None): F(2),
            ("PS", "Z", None): F(-2),
            ("PS", "PE", None): F(4),
            ("PE", "PS", None): F(-4),
            ("PS", "A", None): INF,
            ("A", "PS", None): F(0),
            ("C", "PE", None): INF,
            ("PE", "C", None): F(0),
            ("A", "C", None): F(5),
            ("C", "A", None): F(-4),
            ("A", "C", ("lc", "C")): F(4),
            ("C", "A", ("uc", "C")): F(-5),
        }
        assert g.edges == expected

    def test_bad_contingent_bounds_rejected(self):
        for lo, hi in [(0, 5), (5, 5), (3, 2), (1, INF)]:
            with pytest.raises(MalformedNetwork):
                ContingentLink("A", "C", lo if lo == INF else F(lo), hi if hi == INF else F(hi))

    def test_shared_contingent_point_rejected(self):
        with pytest.raises(MalformedNetwork):
            make_stnu(
                ["Z", "A", "B", "C"],
                [],
                [ContingentLink("A", "C", F(1), F(2)), ContingentLink("B", "C", F(1), F(2))],
            )


class TestAllMax:
    def test_fragment_keeps_tighter_upper_case(self):
        g = allmax_projection(to_labeled_distance_graph(narrow_interval_fragment(y=5)))
        assert g.edges[("C", "A")] == -5  # -y wins over -x

    def test_unlabeled_graph_unchanged(self):
        stnu = make_stnu(["Z", "X", "Y"], [req("X", "Y", 1, 3)], [])
        lg = to_labeled_distance_graph(stnu)
        assert allmax_projection(lg).edges == {k[:2]: w for k, w in lg.edges.items()}

    def test_projection_never_smaller_than_rules_say(self):
        stnu = make_stnu(
            ["Z", "A", "C", "E"],
            [req("C", "E", 0, INF)],
            [ContingentLink("A", "C", F(2), F(8))],
        )
        lg = to_labeled_distance_graph(stnu)
        g = allmax_projection(lg)
        assert g.edges[("C", "A")] == -8
        assert g.edges[("E", "C")] == 0
        assert all(len(k) == 2 for k in g.edges)
        assert len(g.edges) <= len(lg.edges)


def lgraph(points, edges, registry):
    return LabeledGraph(tuple(points), dict(edges), dict(registry))


class TestReductionRules:
    def test_no_case_composition(self):
        g = lgraph(["U", "W", "X"], {("U", "W", None): F(3), ("W", "X", None): F(-2)}, {})
        g2, changed = apply_reduction_round(g)
        assert changed and g2.edges[("U", "X", None)] == 1

    def test_lower_case_composition(self):
        g = lgraph(
            ["A", "C", "A2"],
            {("A", "C", ("lc", "C")): F(4), ("C", "A2", None): F(-5)},
            {"C": ("A", F(4), F(6))},
        )
        g2, changed = apply_reduction_round(g)
        assert changed and g2.edges[("A", "A2", None)] == -1

    def test_lower_case_needs_negative_target(self):
        g = lgraph(
            ["A", "C", "X"],
            {("A", "C", ("lc", "C")): F(4), ("C", "X", None): F(0)},
            {"C": ("A", F(4), F(6))},
        )
        _, changed = apply_reduction_round(g)
        assert not changed

    def test_label_removal(self):
        g = lgraph(
            ["U", "A", "C"],
            {("U", "A", ("uc", "C")): F(-3)},
            {"C": ("A", F(4), F(9))},
        )
        g2, changed = apply_reduction_round(g)
        assert changed and g2.edges[("U", "A", None)] == -3

    def test_label_removal_threshold(self):
        g = lgraph(
            ["U", "A", "C"],
            {("U", "A", ("uc", "C")): F(-5)},
            {"C": ("A", F(4), F(9))},
        )
        _, changed = apply_reduction_round(g)
        assert not changed  # -5 < -x = -4, label must stay

    def test_upper_case_composition(self):
        g = lgraph(
            ["U", "W", "A", "C"],
            {("U", "W", None): F(2), ("W", "A", ("uc", "C")): F(-6)},
            {"C": ("A", F(1), F(6))},
        )
        g2, changed = apply_reduction_round(g)
        assert changed and g2.edges[("U", "A", ("uc", "C"))] == -4

    def test_cross_case_composition(self):
        g = lgraph(
            ["A", "C", "A2", "C2"],
            {("A", "C", ("lc", "C")): F(3), ("C", "A2", ("uc", "C2")): F(-4)},
            {"C": ("A", F(3), F(5)), "C2": ("A2", F(1), F(4))},
        )
        g2, changed = apply_reduction_round(g)
        assert changed and g2.edges[("A", "A2", ("uc", "C2"))] == -1

    def test_cross_case_same_contingent_blocked(self):
        g = lgraph(
            ["A", "C"],
            {("A", "C", ("lc", "C")): F(3), ("C", "A", ("uc", "C")): F(-5)},
            {"C": ("A", F(3), F(5))},
        )
        g2, changed = apply_reduction_round(g)
        assert ("A", "A", ("uc", "C")) not in g2.edges

    def test_rounds_are_monotone(self):
        stnu = narrow_interval_fragment(j=1, k=6, x=2, y=5)
        g = to_labeled_distance_graph(stnu)
        for _ in range(6):
            g2, changed = apply_reduction_round(g)
            for key, w in g.edges.items():
                assert g2.edges.get(key, w) <= w
            if not changed:
                break
            g = g2


class TestDcCheck:
    def test_narrow_interval_not_controllable(self):
        verdict = check_dynamic_controllability(narrow_interval_fragment(j=2, k=4, x=4, y=5))
        assert not verdict.controllable
        cycle = verdict.witness
        assert cycle is not None
        g = allmax_projection(to_labeled_distance_graph(narrow_interval_fragment(j=2, k=4, x=4, y=5)))
        total = sum((g.edges[(cycle[i], cycle[(i + 1) % len(cycle)])] for i in range(len(cycle))), F(0))
        assert total == 4 - 5  # k - y

    def test_wide_interval_controllable(self):
        assert check_dynamic_controllability(narrow_interval_fragment(j=2, k=5, x=4, y=5)).controllable
        assert check_dynamic_controllability(narrow_interval_fragment(j=2, k=7, x=4, y=5)).controllable

    def test_lone_contingent_controllable(self):
        stnu = make_stnu(["Z", "A", "C"], [], [ContingentLink("A", "C", F(1), F(2))])
        assert check_dynamic_controllability(stnu).controllable


class TestProjection:
    def test_fixed_duration(self):
        stnu = make_stnu(["Z", "A", "C"], [req("Z", "A", 0, 10)], [ContingentLink("A", "C", F(4), F(5))])
        stn = project(stnu, {"C": 4})
        idx = stn.link_index()
        assert (idx[("A", "C")].lower, idx[("A", "C")].upper) == (4, 4)

    def test_empty_situation_is_identity(self):
        stnu = make_stnu(["Z", "X"], [req("Z", "X", 1, 2)], [])
        assert project(stnu, {}).links == stnu.base.links

    def test_incomplete_and_out_of_bounds(self):
        stnu = make_stnu(["Z", "A", "C"], [], [ContingentLink("A", "C", F(4), F(5))])
        with pytest.raises(IncompleteSituation):
            project(stnu, {})
        with pytest.raises(DurationOutOfBounds):
            project(stnu, {"C": 6})


def random_stnu(rng, max_extra_points=4):
    """Chain-anchored random instance inside the oracle's preconditions."""
    n = rng.randint(3, max_extra_points)
    points = ["Z"] + [f"X{i}" for i in range(1, n + 1)]
    links = []
    contingents = []
    available = points[1:]
    n_cont = rng.randint(0, min(2, len(available) // 2))
    cont_points = []
    for _ in range(n_cont):
        c = available.pop(rng.randrange(len(available)))
        cont_points.append(c)
    for c in cont_points:
        sources = [p for p in points if p != c and p not in cont_points]
        a = rng.choice(sources)
        x = rng.randint(1, 4)
        y = rng.randint(x + 1, 6)
        contingents.append(ContingentLink(a, c, F(x), F(y)))
    # anchor controls to the origin, then sprinkle cross links
    for p in available:
        lo = rng.randint(0, 4)
        hi = rng.randint(lo, 6)
        links.append(req("Z", p, lo, hi))
    for _ in range(rng.randint(0, 2)):
        src, dst = rng.sample(points, 2)
        lo = rng.randint(0, 3)
        hi = rng.randint(lo, 6)
        links.append(req(src, dst, lo, hi))
    return make_stnu(points, links, contingents)


class TestOracle:
    def test_narrow_interval_refuted(self):
        assert brute_force_dc_oracle(narrow_interval_fragment(j=2, k=4, x=4, y=5)) is False

    def test_consistent_base_without_contingents(self):
        stnu = make_stnu(["Z", "X"], [req("Z", "X", 1, 2)], [])
        assert brute_force_dc_oracle(stnu) is True

    def test_size_guard(self):
        points = ["Z"] + [f"A{i}" for i in range(5)] + [f"C{i}" for i in range(5)]
        conts = [ContingentLink(f"A{i}", f"C{i}", F(1), F(2)) for i in range(5)]
        with pytest.raises(InstanceTooLarge):
            brute_force_dc_oracle(make_stnu(points, [], conts))

    def test_agreement_with_dc_checker(self):
        rng = random.Random(0xACE)
        for trial in range(30):
            stnu = random_stnu(rng)
            want = brute_force_dc_oracle(stnu)
            got = check_dynamic_controllability(stnu).controllable
            assert got == want, f"trial {trial}: checker={got} oracle={want} stnu={stnu}"


def test_projection_of_controllable_instance_is_consistent():
    stnu = narrow_interval_fragment(j=2, k=5, x=4, y=5)
    for d in (4, F(9, 2), 5):
        assert check_consistency(project(stnu, {"C": d})).consistent
