"""Exhaustive game-search oracle for dynamic controllability at desk scale.

Execution is modeled as a turn game on an integer grid: at each instant the
adversary first reveals which pending contingents complete (forced at their
upper bounds), then the scheduler commits a set of control-point executions
for the same instant. Scheduler moves may thus react to observations with
zero delay, which is exactly the semantics of the reduction-rule checker
(its lower-case rule fires only on strictly negative edges, so waiting for
an observation and acting at that same instant is admissible). Completions
themselves can never depend on same-instant scheduler moves, because every
contingent duration has a strictly positive lower bound.

The STNU is controllable iff the scheduler has a strategy that completes
every point without violating a requirement edge, whatever the adversary
does. Sound only on the small instances the precondition admits.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .bounds import INF
from .errors import InstanceTooLarge
from .stn import graph_consistency, to_distance_graph
from .stnu import Stnu

MAX_CONTINGENTS = 4
MAX_BOUND = 6


def _as_units(value, step) -> int:
    scaled = Fraction(value) / step
    if scaled.denominator != 1:
        raise InstanceTooLarge(f"grid step {step} does not divide bound {value}")
    return int(scaled)


def brute_force_dc_oracle(stnu: Stnu, step=1) -> bool:
    step = Fraction(step)
    if len(stnu.contingents) > MAX_CONTINGENTS:
        raise InstanceTooLarge(f"more than {MAX_CONTINGENTS} contingent links")
    for link in stnu.base.links:
        for b in (link.lower, link.upper):
            if b != INF and b != -INF and abs(b) > MAX_BOUND:
                raise InstanceTooLarge(f"bound {b} exceeds {MAX_BOUND}")

    graph = to_distance_graph(stnu.base)
    report = graph_consistency(graph, stnu.base.origin)
    if not report.consistent:
        return False  # not even some projection is schedulable

    points = list(stnu.points)
    index = {p: i for i, p in enumerate(points)}
    origin = index[stnu.base.origin]
    contingent_of = {}  # contingent idx -> (activation idx, x units, y units)
    for c in stnu.contingents:
        contingent_of[index[c.contingent]] = (
            index[c.activation],
            _as_units(c.lower, step),
            _as_units(c.upper, step),
        )
    controls = [i for i in range(len(points)) if i not in contingent_of and i != origin]

    # Constraint edges in grid units: time[v] - time[u] <= w.
    edges_at: list[list[tuple[int, int]]] = [[] for _ in points]  # per point: (other, ...)
    checks: list[list[tuple[int, int, bool]]] = [[] for _ in points]
    for (u, v), w in graph.edges.items():
        if w == INF:
            continue
        wu = _as_units(w, step)
        ui, vi = index[u], index[v]
        checks[vi].append((ui, wu, True))   # fixing v: time[v] - time[u] <= w
        checks[ui].append((vi, wu, False))  # fixing u: time[v] - time[u] <= w

    # Static per-point candidate windows from the relaxed network; any
    # dynamic execution lies inside them (projection constraints only tighten).
    hmax = sum(
        _as_units(abs(b), step)
        for l in stnu.base.links
        for b in (l.lower, l.upper)
        if b != INF and b != -INF
    ) + _as_units(MAX_BOUND, step) + 1
    window: list[tuple[int, int]] = []
    for p in points:
        lo, hi = report.ranges[p]
        lo_u = 0 if lo == -INF else max(0, _as_units(lo, step))
        hi_u = hmax if hi == INF else _as_units(hi, step)
        window.append((lo_u, min(hi_u, hmax)))
    horizon = max((w[1] for w in window), default=0)
    for ci, (ai, _x, y) in contingent_of.items():
        horizon = max(horizon, window[ai][1] + y)

    n = len(points)

    def ok_to_fix(times: tuple, p: int, t: int) -> bool:
        for q, w, incoming in checks[p]:
            tq = times[q]
            if tq is None:
                continue
            if incoming:
                if t - tq > w:
                    return False
            else:
                if tq - t > w:
                    return False
        return True

    @lru_cache(maxsize=None)
    def win(t: int, times: tuple) -> bool:
        if all(v is not None for v in times):
            return True  # incrementally checked, so complete means consistent
        if t > horizon:
            return False
        # A control point whose deadline passed can never be executed.
        for p in controls:
            if times[p] is None and window[p][1] < t:
                return False
        pending = []
        for ci, (ai, x, y) in contingent_of.items():
            if times[ci] is None and times[ai] is not None:
                if times[ai] + y < t:
                    return False  # adversary was forced earlier; unreachable
                pending.append((ci, times[ai] + x, times[ai] + y))

        executable = [
            p for p in controls
            if times[p] is None and window[p][0] <= t <= window[p][1]
        ]
        eligible = [ci for ci, lo, hi in pending if lo <= t <= hi]
        forced = {ci for ci, lo, hi in pending if hi == t}
        # Adversary move first: any completion subset containing the forced
        # ones. The scheduler then answers, seeing those completions.
        for nmask in range(1 << len(eligible)):
            done = [eligible[i] for i in range(len(eligible)) if nmask >> i & 1]
            if not forced.issubset(done):
                continue
            observed = list(times)
            violated = False
            for ci in done:
                if not ok_to_fix(tuple(observed), ci, t):
                    violated = True
                observed[ci] = t
            if violated:
                return False  # the adversary may legally break a requirement
            answered = False
            for mask in range(1 << len(executable)):
                chosen = [executable[i] for i in range(len(executable)) if mask >> i & 1]
                after = list(observed)
                feasible = True
                for p in chosen:
                    if not ok_to_fix(tuple(after), p, t):
                        feasible = False
                        break
                    after[p] = t
                if feasible and win(t + 1, tuple(after)):
                    answered = True
                    break
            if not answered:
                return False
        return True

    initial = [None] * n
    initial[origin] = 0
    result = win(0, tuple(initial))
    win.cache_clear()
    return result
