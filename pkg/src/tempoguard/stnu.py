"""STNUs, labeled distance graphs, and dynamic-controllability checking.

The DC check iterates: test the AllMax projection for consistency, then run
one saturation pass of the edge-generation rules, until quiescence or a
cutoff of |points| rounds after the first. The rule set is fixed as:

  No-Case       U -v-> W,  W -w-> X                 =>  U -(v+w)-> X
  Upper-Case    U -v-> W,  W -C:w-> X               =>  U -C:(v+w)-> X
  Lower-Case    A -c:x-> C,  C -w-> X   (w < 0)     =>  A -(x+w)-> X
  Cross-Case    A -c:x-> C,  C -C':w-> X (w < 0,
                                          C' != C)  =>  A -C':(x+w)-> X
  Label-Removal U -C:v-> A  (v >= -lower(C))        =>  U -v-> A

Per (ordered pair, label) only the minimum weight is kept; ordinary and
labeled edges over the same pair coexist.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bounds import Bound, INF, add, fr, neg
from .errors import (
    DurationOutOfBounds,
    IncompleteSituation,
    MalformedNetwork,
)
from .stn import (
    DistanceGraph,
    RequirementLink,
    Stn,
    TimePointId,
    find_negative_cycle,
    make_stn,
    to_distance_graph,
)

# Edge label: None for ordinary, ("lc", C) lower-case, ("uc", C) upper-case.
Label = tuple[str, TimePointId] | None

# Chosen duration per contingent point.
Situation = dict[TimePointId, Bound]


@dataclass(frozen=True)
class ContingentLink:
    activation: TimePointId
    contingent: TimePointId
    lower: Bound
    upper: Bound

    def __post_init__(self):
        if self.activation == self.contingent:
            raise MalformedNetwork(f"contingent link {self.contingent}: activation equals contingent")
        if not (Fraction(0) < self.lower < self.upper < INF):
            raise MalformedNetwork(
                f"contingent link {self.activation}=>{self.contingent}: "
                f"bounds [{self.lower},{self.upper}] must satisfy 0 < x < y < inf"
            )


@dataclass(frozen=True)
class Stnu:
    base: Stn
    contingents: tuple[ContingentLink, ...] = ()

    @property
    def points(self) -> tuple[TimePointId, ...]:
        return self.base.points

    def contingent_points(self) -> set[TimePointId]:
        return {c.contingent for c in self.contingents}

    def kind(self, p: TimePointId) -> str:
        if p in self.contingent_points():
            return "contingent"
        if any(c.activation == p for c in self.contingents):
            return "activation"
        return "control"


def make_stnu(points, links, contingents, origin: TimePointId = "Z") -> Stnu:
    """Build an Stnu whose base carries the [x,y] pair of every contingent link."""
    conts = tuple(contingents)
    seen: set[TimePointId] = set()
    for c in conts:
        if c.contingent in seen:
            raise MalformedNetwork(f"two contingent links share point {c.contingent}")
        seen.add(c.contingent)
    if origin in seen:
        raise MalformedNetwork("origin cannot be a contingent point")
    base_links = list(links)
    for c in conts:
        base_links.append(RequirementLink(c.activation, c.contingent, c.lower, c.upper))
    base = make_stn(points, base_links, origin)
    for c in conts:
        if c.activation not in base.points or c.contingent not in base.points:
            raise MalformedNetwork(f"contingent link {c.activation}=>{c.contingent} references unknown point")
    return Stnu(base, conts)


@dataclass(frozen=True)
class LabeledGraph:
    points: tuple[TimePointId, ...]
    edges: dict[tuple[TimePointId, TimePointId, Label], Bound]
    # contingent point -> (activation, lower, upper)
    registry: dict[TimePointId, tuple[TimePointId, Bound, Bound]]
    origin: TimePointId = "Z"


def to_labeled_distance_graph(stnu: Stnu) -> LabeledGraph:
    """Requirement links map as in the plain distance graph; each contingent
    A =>[x,y] C adds the lower-case edge A -c:x-> C and upper-case C -C:-y-> A."""
    plain = to_distance_graph(stnu.base)
    edges: dict[tuple[TimePointId, TimePointId, Label], Bound] = {
        (u, v, None): w for (u, v), w in plain.edges.items()
    }
    registry = {}
    for c in stnu.contingents:
        edges[(c.activation, c.contingent, ("lc", c.contingent))] = c.lower
        edges[(c.contingent, c.activation, ("uc", c.contingent))] = neg(c.upper)
        registry[c.contingent] = (c.activation, c.lower, c.upper)
    return LabeledGraph(stnu.points, edges, registry, stnu.base.origin)


def allmax_projection(graph: LabeledGraph) -> DistanceGraph:
    """Drop lower-case edges, strip upper-case labels, keep the tighter edge per pair."""
    edges: dict[tuple[TimePointId, TimePointId], Bound] = {}
    for (u, v, label), w in graph.edges.items():
        if label is not None and label[0] == "lc":
            continue
        key = (u, v)
        if key not in edges or w < edges[key]:
            edges[key] = w
    return DistanceGraph(graph.points, edges)


def _derive(e1, e2):
    """Apply the binary rules to edges e1=(u,w1,l1,wt1) ending where e2 starts."""
    u, _, l1, w1 = e1
    _, x, l2, w2 = e2
    if l1 is None:
        if l2 is None:
            return (u, x, None, add(w1, w2))  # No-Case
        if l2[0] == "uc":
            return (u, x, l2, add(w1, w2))  # Upper-Case
        return None
    if l1[0] == "lc":
        if w2 >= 0:
            return None
        if l2 is None:
            return (u, x, None, add(w1, w2))  # Lower-Case
        if l2[0] == "uc" and l2[1] != l1[1]:
            return (u, x, l2, add(w1, w2))  # Cross-Case
    return None


def apply_reduction_round(graph: LabeledGraph) -> tuple[LabeledGraph, bool]:
    """One full saturation pass of the rule set; changed=False iff quiescent."""
    out, changed, _ = _reduction_round(graph)
    return out, changed


def _reduction_round(graph: LabeledGraph, delta=None) -> tuple[LabeledGraph, bool, dict]:
    """One saturation pass; returns (graph', changed, changed-edges).

    When ``delta`` is given (the edges changed by the previous round), only
    compositions touching a changed edge are recomputed; results are
    identical to a full pass because min-merging is monotone.
    """
    edges = graph.edges
    work = edges if delta is None else delta

    by_src: dict[TimePointId, list] = {}
    by_dst: dict[TimePointId, list] = {}
    for (u, v, label), w in edges.items():
        if w == INF:
            continue
        item = (u, v, label, w)
        by_src.setdefault(u, []).append(item)
        by_dst.setdefault(v, []).append(item)

    produced: dict[tuple[TimePointId, TimePointId, Label], Bound] = {}

    def emit(edge):
        if edge is None:
            return
        u, v, label, w = edge
        if u == v and label is None and w >= 0:
            return  # non-negative self loop carries no information
        key = (u, v, label)
        if key not in produced or w < produced[key]:
            produced[key] = w

    for (u, v, label), w in work.items():
        if w == INF:
            continue
        item = (u, v, label, w)
        for right in by_src.get(v, ()):
            emit(_derive(item, right))
        for left in by_dst.get(u, ()):
            emit(_derive(left, item))
        if label is not None and label[0] == "uc" and label[1] in graph.registry:
            lower = graph.registry[label[1]][1]
            if w >= neg(lower):
                emit((u, v, None, w))  # Label-Removal

    changed: dict[tuple[TimePointId, TimePointId, Label], Bound] = {}
    for key, w in produced.items():
        if key not in edges or w < edges[key]:
            changed[key] = w
    if not changed:
        return graph, False, {}
    merged = dict(edges)
    merged.update(changed)
    return LabeledGraph(graph.points, merged, graph.registry, graph.origin), True, changed


@dataclass(frozen=True)
class DcVerdict:
    controllable: bool
    witness: tuple[TimePointId, ...] | None = None
    rounds_used: int = 0


def check_dynamic_controllability(stnu: Stnu) -> DcVerdict:
    """Controllable iff the AllMax projection stays consistent through
    rule saturation (quiescence or the cutoff of |points| extra rounds)."""
    graph = to_labeled_distance_graph(stnu)
    cutoff = 1 + len(graph.points)
    rounds = 0
    delta = None
    while True:
        cycle = find_negative_cycle(allmax_projection(graph))
        if cycle is not None:
            return DcVerdict(False, witness=cycle, rounds_used=rounds)
        if rounds >= cutoff:
            return DcVerdict(True, rounds_used=rounds)
        graph, changed, delta = _reduction_round(graph, delta)
        if not changed:
            return DcVerdict(True, rounds_used=rounds)
        rounds += 1


def project(stnu: Stnu, situation: Situation) -> Stn:
    """Fix every contingent duration, turning the STNU into an STN."""
    links = list(stnu.base.links)
    for c in stnu.contingents:
        if c.contingent not in situation:
            raise IncompleteSituation(f"no duration for {c.contingent}")
        d = fr(situation[c.contingent])
        if not (c.lower <= d <= c.upper):
            raise DurationOutOfBounds(f"{c.contingent}: {d} outside [{c.lower},{c.upper}]")
        links.append(RequirementLink(c.activation, c.contingent, d, d))
    extra = set(situation) - {c.contingent for c in stnu.contingents}
    if extra:
        raise IncompleteSituation(f"durations for unknown contingents: {sorted(extra)}")
    return make_stn(stnu.points, links, stnu.base.origin)
