"""Simple temporal networks: links, distance graph, consistency, assignment.

A network is a value; every operation returns a fresh report or network.
Consistency and per-point ranges come from shortest paths on the distance
graph (Bellman-Ford from/to the origin, which also extracts a negative
cycle as the inconsistency witness).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .bounds import Bound, INF, add, fr, neg
from .errors import InconsistentNetwork, MalformedNetwork, UnknownPoint, ValueOutOfRange

TimePointId = str

ORIGIN: TimePointId = "Z"


@dataclass(frozen=True)
class RequirementLink:
    """Link src ->[lower,upper] dst: encodes dst-src <= upper and src-dst <= -lower.

    Merged links (same ordered pair) keep the range intersection, which may
    be empty; emptiness surfaces as a negative cycle in check_consistency,
    not as a construction error.
    """

    src: TimePointId
    dst: TimePointId
    lower: Bound
    upper: Bound
    roles: tuple[str, ...] = ()

    def intersect(self, other: "RequirementLink") -> "RequirementLink":
        return RequirementLink(
            self.src,
            self.dst,
            max(self.lower, other.lower),
            min(self.upper, other.upper),
            tuple(dict.fromkeys(self.roles + other.roles)),
        )


@dataclass(frozen=True)
class Stn:
    """Point set plus requirement links, with a designated origin point."""

    points: tuple[TimePointId, ...]
    links: tuple[RequirementLink, ...]
    origin: TimePointId = ORIGIN

    def has_point(self, p: TimePointId) -> bool:
        return p in self.points

    def link_index(self) -> dict[tuple[TimePointId, TimePointId], RequirementLink]:
        return {(l.src, l.dst): l for l in self.links}


def make_stn(points, links, origin: TimePointId = ORIGIN) -> Stn:
    """Build an Stn, collapsing duplicate ordered pairs to their intersection."""
    pts = tuple(dict.fromkeys(points))
    if origin not in pts:
        pts = (origin,) + pts
    merged: dict[tuple[TimePointId, TimePointId], RequirementLink] = {}
    for link in links:
        if link.src not in pts or link.dst not in pts:
            raise MalformedNetwork(f"link {link.src}->{link.dst} references unknown point")
        key = (link.src, link.dst)
        merged[key] = merged[key].intersect(link) if key in merged else link
    return Stn(pts, tuple(merged.values()), origin)


def with_link(stn: Stn, link: RequirementLink) -> Stn:
    return make_stn(stn.points, stn.links + (link,), stn.origin)


@dataclass(frozen=True)
class DistanceGraph:
    points: tuple[TimePointId, ...]
    edges: dict[tuple[TimePointId, TimePointId], Bound] = field(default_factory=dict)


def to_distance_graph(stn: Stn) -> DistanceGraph:
    """Map each link src ->[x,y] dst to edges (src,dst,y) and (dst,src,-x)."""
    edges: dict[tuple[TimePointId, TimePointId], Bound] = {}

    def put(u, v, w):
        key = (u, v)
        if key not in edges or w < edges[key]:
            edges[key] = w

    for link in stn.links:
        if link.src not in stn.points or link.dst not in stn.points:
            raise MalformedNetwork(f"link {link.src}->{link.dst} references unknown point")
        put(link.src, link.dst, link.upper)
        put(link.dst, link.src, neg(link.lower))
    return DistanceGraph(stn.points, edges)


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    negative_cycle: tuple[TimePointId, ...] | None = None
    ranges: dict[TimePointId, tuple[Bound, Bound]] | None = None


def _finite_edges(graph: DistanceGraph):
    return [(u, v, w) for (u, v), w in graph.edges.items() if w != INF]


def find_negative_cycle(graph: DistanceGraph) -> tuple[TimePointId, ...] | None:
    """Bellman-Ford with a virtual source; returns a cycle point sequence or None."""
    points = graph.points
    edges = _finite_edges(graph)
    dist: dict[TimePointId, Bound] = {p: Fraction(0) for p in points}
    pred: dict[TimePointId, TimePointId | None] = {p: None for p in points}
    cycle_entry = None
    for it in range(len(points)):
        changed = False
        for u, v, w in edges:
            cand = add(dist[u], w)
            if cand < dist[v]:
                dist[v] = cand
                pred[v] = u
                changed = True
                cycle_entry = v
        if not changed:
            return None
    if cycle_entry is None:
        return None
    # Walk back |V| steps to land inside the cycle, then collect it.
    node = cycle_entry
    for _ in range(len(points)):
        node = pred[node]
    cycle = [node]
    cur = pred[node]
    while cur != node:
        cycle.append(cur)
        cur = pred[cur]
    cycle.reverse()
    return tuple(cycle)


def _single_source(graph: DistanceGraph, source: TimePointId, reverse: bool) -> dict[TimePointId, Bound]:
    dist: dict[TimePointId, Bound] = {p: INF for p in graph.points}
    dist[source] = Fraction(0)
    edges = _finite_edges(graph)
    if reverse:
        edges = [(v, u, w) for u, v, w in edges]
    for _ in range(len(graph.points) - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] == INF:
                continue
            cand = add(dist[u], w)
            if cand < dist[v]:
                dist[v] = cand
                changed = True
        if not changed:
            break
    return dist


def graph_consistency(graph: DistanceGraph, origin: TimePointId) -> ConsistencyReport:
    cycle = find_negative_cycle(graph)
    if cycle is not None:
        return ConsistencyReport(False, negative_cycle=cycle)
    upper = _single_source(graph, origin, reverse=False)
    to_origin = _single_source(graph, origin, reverse=True)
    ranges = {p: (neg(to_origin[p]), upper[p]) for p in graph.points}
    return ConsistencyReport(True, ranges=ranges)


def check_consistency(stn: Stn) -> ConsistencyReport:
    """Consistent iff the distance graph has no negative cycle.

    Range of X is [-(shortest path X->Z), shortest path Z->X]; the origin's
    range is [0,0].
    """
    return graph_consistency(to_distance_graph(stn), stn.origin)


def feasible_range(stn: Stn, x: TimePointId) -> tuple[Bound, Bound]:
    if not stn.has_point(x):
        raise UnknownPoint(x)
    report = check_consistency(stn)
    if not report.consistent:
        raise InconsistentNetwork(f"negative cycle: {report.negative_cycle}")
    return report.ranges[x]


def assign(stn: Stn, x: TimePointId, value) -> Stn:
    """Fix x = value by replacing any prior origin->x link with [value,value]."""
    v = fr(value)
    if not stn.has_point(x):
        raise UnknownPoint(x)
    if x == stn.origin:
        raise ValueOutOfRange("cannot reassign the origin point")
    lo, hi = feasible_range(stn, x)
    if not (lo <= v <= hi):
        raise ValueOutOfRange(f"{x}={v} outside [{lo},{hi}]")
    kept = tuple(l for l in stn.links if not (l.src == stn.origin and l.dst == x))
    return make_stn(stn.points, kept + (RequirementLink(stn.origin, x, v, v),), stn.origin)
