"""Execution engine for configurations under propagation rules.

States are values: every operation validates against the current state and
returns a fresh one, so a rejected step leaves the caller's state intact.
Access-network points (whose ranges are singletons from the start) are
auto-executed by the engine user as the clock passes their forced times;
internal workflow points need an explicit step by "wf"; task points need an
authorized, unblocked user. Each applied step appends a trace entry with a
full authorized-users snapshot, which is the JSON surface every consumer
(CLI, HTTP service, UI) shares.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .bounds import Bound, INF, fmt, fr
from .configuration import Configuration
from .errors import (
    DeadlineMissed,
    EngineError,
    ExecutionError,
    NotEnabled,
    NotPending,
    OutsideContingentWindow,
    ParseError,
    TimeOutOfRange,
    UnknownPoint,
    UserBlocked,
    UserNotAuthorized,
    ViolationError,
    WrongOwner,
)
from .security import (
    DIFFERENT,
    SAME,
    AuthEntry,
    RelativeConstraint,
    RuleSet,
    constraint_to_json,
    is_blocked,
    reduce_relative,
)
from .stn import TimePointId, check_consistency
from .stnu import check_dynamic_controllability
from .trbac import WF_USER

RUNNING = "running"
COMPLETED = "completed"
DEADLOCKED = "deadlocked"
VIOLATION = "violation"


@dataclass(frozen=True)
class Record:
    user: str
    point: TimePointId
    time: Bound


@dataclass(frozen=True)
class ExecutionState:
    config: Configuration
    rules: RuleSet
    auth: dict[TimePointId, tuple[AuthEntry, ...]]
    now: Bound
    executed: dict[TimePointId, Bound]
    pending: dict[TimePointId, tuple[Bound, Bound, Bound]]  # C -> (start, x, y)
    status: str
    trace: tuple[dict, ...]
    ranges: dict[TimePointId, tuple[Bound, Bound]]
    auto_times: dict[TimePointId, Bound]
    predecessors: dict[TimePointId, tuple[TimePointId, ...]]
    warnings: tuple[str, ...] = ()

    def auth_snapshot(self) -> dict:
        return {
            p: [{"user": e.user, "constraint": constraint_to_json(e.constraint)} for e in entries]
            for p, entries in sorted(self.auth.items())
        }


def _network_ranges(config: Configuration, executed: dict[TimePointId, Bound]):
    from .stn import RequirementLink, make_stn

    stn = config.stnu.base
    extra = [
        RequirementLink(stn.origin, p, t, t)
        for p, t in executed.items()
        if p != stn.origin
    ]
    view = make_stn(stn.points, stn.links + tuple(extra), stn.origin)
    report = check_consistency(view)
    if not report.consistent:
        raise ViolationError(f"executed times violate the network: cycle {report.negative_cycle}")
    return report.ranges


def init(config: Configuration, rules: RuleSet, warn_on_uncontrollable: bool = True) -> ExecutionState:
    """Fresh state at time 0 with nothing executed."""
    rules.require_safe()
    known = set(config.stnu.points)
    for rule in rules.rules:
        for p in {rule.guard, *rule.targets}:
            if p not in known:
                raise UnknownPoint(f"rule references {p!r} which is not in the configuration")
    ranges = _network_ranges(config, {})
    auto_times = {
        p: lo
        for p, (lo, hi) in ranges.items()
        if lo == hi and config.is_wf_owned(p)
    }
    preds: dict[TimePointId, list[TimePointId]] = {p: [] for p in config.stnu.points}
    for link in config.stnu.base.links:
        if link.lower >= 0:
            preds[link.dst].append(link.src)
    warnings = []
    if warn_on_uncontrollable and not check_dynamic_controllability(config.stnu).controllable:
        warnings.append("configuration is not dynamically controllable; execution may dead-end")
    return ExecutionState(
        config=config,
        rules=rules,
        auth=dict(config.auth),
        now=Fraction(0),
        executed={},
        pending={},
        status=RUNNING,
        trace=(),
        ranges=ranges,
        auto_times=auto_times,
        predecessors={p: tuple(ps) for p, ps in preds.items()},
        warnings=tuple(warnings),
    )


def _enabled(state: ExecutionState, point: TimePointId) -> bool:
    if point in state.executed:
        return False
    return all(p in state.executed for p in state.predecessors[point])


def _contingent_info(state: ExecutionState, point: TimePointId):
    for c in state.config.stnu.contingents:
        if c.contingent == point:
            return c
    return None


def _apply_execution(state: ExecutionState, user: str, point: TimePointId, t: Bound) -> ExecutionState:
    """Commit one record: clock, pending set, rule firing, constraint reduction."""
    executed = dict(state.executed)
    executed[point] = t
    pending = dict(state.pending)
    pending.pop(point, None)
    for c in state.config.stnu.contingents:
        if c.activation == point:
            pending[c.contingent] = (t, c.lower, c.upper)

    auth = dict(state.auth)
    for rule in state.rules.with_guard(point):
        for target in rule.targets:
            entries = []
            for e in auth[target]:
                matches = (rule.mode == SAME and e.user == user) or (
                    rule.mode == DIFFERENT and e.user != user
                )
                entries.append(AuthEntry(e.user, rule.constraint) if matches else e)
            auth[target] = tuple(entries)
    for p, entries in auth.items():
        if any(isinstance(e.constraint, RelativeConstraint) and e.constraint.point == point for e in entries):
            auth[p] = tuple(
                AuthEntry(e.user, reduce_relative(e.constraint, t))
                if isinstance(e.constraint, RelativeConstraint) and e.constraint.point == point
                else e
                for e in entries
            )

    ranges = _network_ranges(state.config, executed)
    status = COMPLETED if len(executed) == len(state.config.stnu.points) else state.status
    next_state = replace(
        state,
        auth=auth,
        now=max(state.now, t),
        executed=executed,
        pending=pending,
        status=status,
        ranges=ranges,
    )
    entry = {
        "user": user,
        "point": point,
        "time": fmt(t),
        "auth": next_state.auth_snapshot(),
    }
    return replace(next_state, trace=state.trace + (entry,))


def _point_order(state: ExecutionState):
    return {p: i for i, p in enumerate(state.config.stnu.points)}


def advance_time(state: ExecutionState, t, skip: frozenset = frozenset()) -> ExecutionState:
    """Advance the clock, auto-executing due access points chronologically.

    Raises DeadlineMissed (without committing anything) if the target time
    strictly passes an unexecuted point's latest feasible time.
    """
    t = fr(t)
    if t < state.now:
        raise TimeOutOfRange(f"cannot move the clock back to {t} (now {state.now})")
    order = _point_order(state)
    cur = state
    while True:
        due = [
            (cur.auto_times[p], order[p], p)
            for p in cur.auto_times
            if p not in cur.executed and p not in skip and cur.auto_times[p] <= t and _enabled(cur, p)
        ]
        if not due:
            break
        ft, _, p = min(due)
        cur = _apply_execution(cur, WF_USER, p, ft)
    for p in cur.config.stnu.points:
        if p not in cur.executed and p not in skip and cur.ranges[p][1] < t:
            raise DeadlineMissed(f"{p}: latest feasible time {cur.ranges[p][1]} strictly before {t}")
    return replace(cur, now=max(cur.now, t))


@dataclass(frozen=True)
class StepPermit:
    point: TimePointId
    window: tuple[Bound, Bound]
    users: tuple[tuple[str, str, object], ...]  # (user, verdict, constraint-or-None)

    def to_json(self) -> dict:
        return {
            "point": self.point,
            "window": [fmt(self.window[0]), fmt(self.window[1])],
            "users": [
                {"user": u, "verdict": v, "constraint": constraint_to_json(c)}
                for u, v, c in self.users
            ],
        }


def live_enabled(state: ExecutionState) -> list[StepPermit]:
    """Permits for every enabled, live control point at the current time."""
    if state.status != RUNNING:
        return []
    contingent_points = state.config.stnu.contingent_points()
    permits = []
    for p in state.config.stnu.points:
        if p in state.executed or p in contingent_points or not _enabled(state, p):
            continue
        lo, hi = state.ranges[p]
        if not (lo <= state.now <= hi):
            continue
        entries = {e.user: e for e in state.auth[p]}
        verdicts = []
        for u in state.config.users:
            e = entries.get(u)
            if e is None:
                verdicts.append((u, "not-in-set", None))
            elif is_blocked(e, state.now):
                verdicts.append((u, "blocked", e.constraint))
            else:
                verdicts.append((u, "authorized", None))
        permits.append(StepPermit(p, (max(lo, state.now), hi), tuple(verdicts)))
    return permits


def _check_user(state: ExecutionState, user: str, point: TimePointId, t: Bound):
    wf_owned = state.config.is_wf_owned(point)
    if wf_owned != (user == WF_USER):
        raise WrongOwner(
            f"{point} belongs to {'the engine user' if wf_owned else 'role users'}, not {user!r}"
        )
    entry = next((e for e in state.auth[point] if e.user == user), None)
    if entry is None:
        raise UserNotAuthorized(f"{user} not in the authorized set of {point}")
    if is_blocked(entry, t):
        raise UserBlocked(
            f"{user} blocked for {point}: {entry.constraint.text()}", constraint=entry.constraint
        )


def execute_timepoint(state: ExecutionState, user: str, point: TimePointId, t) -> ExecutionState:
    """Execute a control point, firing every rule guarded by it."""
    t = fr(t)
    if state.status != RUNNING:
        raise NotEnabled(f"execution is {state.status}")
    if point not in state.config.stnu.points:
        raise UnknownPoint(point)
    if point in state.config.stnu.contingent_points():
        raise NotEnabled(f"{point} is contingent: it is observed, not executed")
    if point in state.executed:
        raise NotEnabled(f"{point} already executed")
    cur = advance_time(state, t, skip=frozenset({point}))
    if not _enabled(cur, point):
        missing = [p for p in cur.predecessors[point] if p not in cur.executed]
        raise NotEnabled(f"{point} waits for {', '.join(missing)}")
    lo, hi = cur.ranges[point]
    if not (lo <= t <= hi):
        raise TimeOutOfRange(f"{point}={t} outside its feasible window [{fmt(lo)},{fmt(hi)}]")
    _check_user(cur, user, point, t)
    return _apply_execution(cur, user, point, t)


def observe_contingent(state: ExecutionState, user: str, point: TimePointId, t) -> ExecutionState:
    """Record a contingent completion reported by an authorized user."""
    t = fr(t)
    if state.status != RUNNING:
        raise NotPending(f"execution is {state.status}")
    if point not in state.pending:
        raise NotPending(f"{point} has no pending contingent window")
    start, x, y = state.pending[point]
    if not (start + x <= t <= start + y):
        raise OutsideContingentWindow(
            f"{point}={t} outside [{fmt(start + x)},{fmt(start + y)}] from start {fmt(start)}"
        )
    cur = advance_time(state, t, skip=frozenset({point}))
    lo, hi = cur.ranges[point]
    if not (lo <= t <= hi):
        raise OutsideContingentWindow(
            f"{point}={t} violates surrounding constraints [{fmt(lo)},{fmt(hi)}]"
        )
    _check_user(cur, user, point, t)
    return _apply_execution(cur, user, point, t)


# --- scenario documents -------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    durations: dict[str, Bound]
    wf_choices: dict[TimePointId, Bound]
    steps: tuple[Record, ...]


def parse_scenario(doc: dict, config: Configuration) -> Scenario:
    durations = {}
    for task, d in doc.get("durations", {}).items():
        if task not in config.task_points:
            raise ParseError(f"duration for unknown task {task!r}", "durations")
        durations[task] = fr(d)
    for c in config.stnu.contingents:
        task = next(t for t, (a, _) in config.task_points.items() if a == c.activation)
        if task in durations and not (c.lower <= durations[task] <= c.upper):
            raise ParseError(
                f"duration {durations[task]} for {task} outside [{c.lower},{c.upper}]", "durations"
            )
    wf_choices = {}
    for p, t in doc.get("wfChoices", {}).items():
        if p not in config.stnu.points:
            raise ParseError(f"wf choice for unknown point {p!r}", "wfChoices")
        wf_choices[p] = fr(t)
    steps = tuple(
        Record(s["user"], s["point"], fr(s["time"])) for s in doc.get("steps", [])
    )
    for s in steps:
        if s.point not in config.stnu.points:
            raise ParseError(f"step references unknown point {s.point!r}", "steps")
    # cross-check steps against declared durations
    times = {s.point: s.time for s in steps}
    for task, (a, c) in config.task_points.items():
        if task in durations and a in times and c in times:
            if times[c] - times[a] != durations[task]:
                raise ParseError(
                    f"{task}: steps give duration {times[c] - times[a]}, scenario says {durations[task]}",
                    "durations",
                )
    return Scenario(durations, wf_choices, steps)


@dataclass
class ScenarioResult:
    state: ExecutionState
    ok: bool
    failed_step: int | None = None
    error: EngineError | None = None


def _topological_order(config: Configuration) -> dict[TimePointId, int]:
    preds: dict[TimePointId, set] = {p: set() for p in config.stnu.points}
    for link in config.stnu.base.links:
        if link.lower >= 0:
            preds[link.dst].add(link.src)
    order: dict[TimePointId, int] = {}
    remaining = list(config.stnu.points)
    rank = 0
    while remaining:
        ready = [p for p in remaining if preds[p] <= set(order)]
        if not ready:  # ordering cycle: fall back to construction order
            ready = remaining[:]
        for p in ready:
            order[p] = rank
            rank += 1
            remaining.remove(p)
    return order


def run_scenario(config: Configuration, rules: RuleSet, scenario: Scenario) -> ScenarioResult:
    """Drive init/advance/execute/observe from a scripted scenario."""
    topo = _topological_order(config)
    events: list[tuple[Bound, int, Record]] = []
    for s in scenario.steps:
        events.append((s.time, topo[s.point], s))
    for p, t in scenario.wf_choices.items():
        events.append((t, topo[p], Record(WF_USER, p, t)))
    events.sort(key=lambda e: (e[0], e[1]))

    state = init(config, rules)
    contingent_points = config.stnu.contingent_points()
    for i, (_, _, step) in enumerate(events):
        try:
            if step.point in contingent_points:
                state = observe_contingent(state, step.user, step.point, step.time)
            else:
                state = execute_timepoint(state, step.user, step.point, step.time)
        except ExecutionError as exc:
            if isinstance(exc, ViolationError):
                state = replace(state, status=VIOLATION)
            return ScenarioResult(state, ok=False, failed_step=i, error=exc)
    # drain the remaining auto points
    leftovers = [p for p in config.stnu.points if p not in state.executed]
    manual = [p for p in leftovers if p not in state.auto_times]
    if manual:
        return ScenarioResult(
            state, ok=False, error=ParseError(f"scenario never executes {', '.join(sorted(manual))}", "steps")
        )
    if leftovers:
        try:
            state = advance_time(state, max(state.auto_times[p] for p in leftovers))
        except ExecutionError as exc:
            if isinstance(exc, ViolationError):
                state = replace(state, status=VIOLATION)
            return ScenarioResult(state, ok=False, error=exc)
    return ScenarioResult(state, ok=(state.status == COMPLETED))


def validate_schedule(config: Configuration, trace) -> list[str]:
    """Post-hoc check of a completed trace against every link and contingent."""
    times: dict[TimePointId, Bound] = {}
    for entry in trace:
        times[entry["point"] if isinstance(entry, dict) else entry.point] = fr(
            entry["time"] if isinstance(entry, dict) else entry.time
        )
    issues = []
    for p in config.stnu.points:
        if p not in times:
            issues.append(f"{p} never executed")
    for link in config.stnu.base.links:
        if link.src in times and link.dst in times:
            d = times[link.dst] - times[link.src]
            if not (link.lower <= d <= link.upper):
                issues.append(
                    f"link {link.src}->{link.dst}: distance {d} outside [{fmt(link.lower)},{fmt(link.upper)}]"
                )
    for c in config.stnu.contingents:
        if c.activation in times and c.contingent in times:
            d = times[c.contingent] - times[c.activation]
            if not (c.lower <= d <= c.upper):
                issues.append(f"contingent {c.contingent}: duration {d} outside [{c.lower},{c.upper}]")
    return issues


# --- seeded auto-run (property suites and the CLI's --seed mode) ---------------

def auto_run(config: Configuration, rules: RuleSet, seed: int) -> ScenarioResult:
    """Drive a full execution choosing times greedily and users randomly.

    Point choice is deterministic (earliest option, then earliest upper
    bound, then name); the seeded rng picks contingent durations and the
    executing user among the sorted unblocked candidates.
    """
    rng = random.Random(seed)
    durations = {
        c.contingent: c.lower + rng.randint(0, int(c.upper - c.lower))
        for c in config.stnu.contingents
    }
    state = init(config, rules, warn_on_uncontrollable=False)
    contingent_points = config.stnu.contingent_points()
    guard = 0
    while state.status == RUNNING:
        guard += 1
        if guard > 10 * len(config.stnu.points):
            return ScenarioResult(replace(state, status=DEADLOCKED), ok=False)
        options = []  # (time, upper, name, kind, point)
        for p, ft in state.auto_times.items():
            if p not in state.executed and _enabled(state, p):
                options.append((ft, state.ranges[p][1], p, "auto", p))
        for p, (start, x, y) in state.pending.items():
            t_done = start + durations[p]
            options.append((t_done, state.ranges[p][1], p, "observe", p))
        for p in config.stnu.points:
            if p in state.executed or p in contingent_points or p in state.auto_times:
                continue
            if not _enabled(state, p):
                continue
            lo, hi = state.ranges[p]
            t0 = max(lo, state.now)
            if t0 > hi:
                return ScenarioResult(replace(state, status=DEADLOCKED), ok=False)
            users = _unblocked_users(state, p, t0)
            if users:
                options.append((t0, hi, p, "execute", p))
            else:
                t1 = _earliest_unblock(state, p, t0, hi)
                if t1 is not None:
                    options.append((t1, hi, p, "execute", p))
        if not options:
            return ScenarioResult(replace(state, status=DEADLOCKED), ok=False)
        t, _, _, kind, point = min(options)
        try:
            if kind == "auto":
                state = advance_time(state, t)
            elif kind == "observe":
                users = _unblocked_users(state, point, t)
                if not users:
                    return ScenarioResult(replace(state, status=DEADLOCKED), ok=False)
                state = observe_contingent(state, rng.choice(users), point, t)
            else:
                users = _unblocked_users(state, point, t)
                if not users:
                    return ScenarioResult(replace(state, status=DEADLOCKED), ok=False)
                user = WF_USER if state.config.is_wf_owned(point) else rng.choice(users)
                state = execute_timepoint(state, user, point, t)
        except ExecutionError as exc:
            if isinstance(exc, ViolationError):
                state = replace(state, status=VIOLATION)
            return ScenarioResult(state, ok=False, error=exc)
    return ScenarioResult(state, ok=(state.status == COMPLETED))


def _unblocked_users(state: ExecutionState, point: TimePointId, t: Bound) -> list[str]:
    return sorted(e.user for e in state.auth[point] if not is_blocked(e, t))


def _earliest_unblock(state: ExecutionState, point: TimePointId, t0: Bound, limit: Bound):
    """Smallest integer time in [t0, limit] at which some user is unblocked;
    None when every candidate hangs on a yet-unexecuted point."""
    if limit == INF:
        limit = t0 + 1000  # auto-run only ever sees bounded windows
    t = Fraction(t0).__ceil__()
    while t <= limit:
        if _unblocked_users(state, point, t):
            return Fraction(t)
        t += 1
    return None


def policy_violations(config: Configuration, rules_doc_policies, trace) -> dict[str, list[str]]:
    """Check the three shipped policy kinds against a completed trace."""
    times: dict[TimePointId, Bound] = {}
    users: dict[TimePointId, str] = {}
    for entry in trace:
        point = entry["point"] if isinstance(entry, dict) else entry.point
        times[point] = fr(entry["time"] if isinstance(entry, dict) else entry.time)
        users[point] = entry["user"] if isinstance(entry, dict) else entry.user
    out: dict[str, list[str]] = {"owner-ends": [], "one-task-at-a-time": [], "tsod": []}
    from .security import OneTaskAtATime, OwnerEnds, TSoD
    from .workflow import parallel_blocks, task_leaves

    for policy in rules_doc_policies:
        if isinstance(policy, OwnerEnds):
            for task, (a, c) in config.task_points.items():
                if users.get(a) != users.get(c):
                    out["owner-ends"].append(f"{task}: started by {users.get(a)}, ended by {users.get(c)}")
        elif isinstance(policy, OneTaskAtATime):
            blocks = parallel_blocks(config.workflow.root)
            members = [t.name for t in task_leaves(blocks[policy.block - 1])]
            for i, ti in enumerate(members):
                for tj in members[i + 1:]:
                    ai, ci = config.task_points[ti]
                    aj, cj = config.task_points[tj]
                    if users.get(ai) == users.get(aj) and not (
                        times[aj] > times[ci] or times[ai] > times[cj]
                    ):
                        out["one-task-at-a-time"].append(
                            f"{users.get(ai)} runs {ti} and {tj} concurrently"
                        )
        elif isinstance(policy, TSoD):
            _, c1 = config.task_points[policy.from_task]
            a2, _ = config.task_points[policy.to_task]
            if users.get(c1) == users.get(a2) and times[a2] - times[c1] <= policy.rest:
                out["tsod"].append(
                    f"{users.get(a2)} rested only {times[a2] - times[c1]} between "
                    f"{policy.from_task} and {policy.to_task}"
                )
    return out
