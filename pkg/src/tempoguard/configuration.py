"""Connecting the workflow STNU with the role-enabling STNs.

For each task, the chosen enabling interval brackets the contingent link:
the start cannot precede the interval start, the end cannot pass the
interval end. The connection links carry the role label used afterwards to
derive each time point's authorized users.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bounds import Bound, INF
from .errors import AmbiguousInterval, EmptyAuthorizedSet, NoEnablingInterval
from .periodic import EnablingStn, IntervalPoints, TimeWindow
from .security import AuthEntry
from .stn import RequirementLink, TimePointId
from .stnu import Stnu, check_dynamic_controllability, make_stnu
from .trbac import WF_USER, TrbacModel
from .workflow import WorkflowStnu


@dataclass(frozen=True)
class TaskEnabling:
    """The interval pair a task was connected to."""

    start: TimePointId
    end: TimePointId
    roles: tuple[str, ...]
    width: Bound


@dataclass(frozen=True)
class Configuration:
    stnu: Stnu
    auth: dict[TimePointId, tuple[AuthEntry, ...]]
    task_points: dict[str, tuple[TimePointId, TimePointId]]
    enabling: dict[str, TaskEnabling]
    users: tuple[str, ...]  # roster including the engine user
    workflow: object = None  # Workflow tree (policy compilation needs block structure)

    def is_wf_owned(self, point: TimePointId) -> bool:
        entries = self.auth.get(point, ())
        return len(entries) == 1 and entries[0].user == WF_USER


def _pick_interval(task: str, candidates: tuple[IntervalPoints, ...], choice, auto: bool):
    if choice is not None:
        n, z = choice
        for iv in candidates:
            if (iv.index, iv.z) == (int(n), int(z)):
                return iv
        raise NoEnablingInterval(f"{task}: no enabling interval with index {n}, displacement {z}")
    if len(candidates) == 1:
        return candidates[0]
    if not candidates:
        raise NoEnablingInterval(task)
    if not auto:
        raise AmbiguousInterval(f"{task}: {len(candidates)} candidate intervals, none assigned")
    return None  # caller walks candidates chronologically


def connect(
    wf: WorkflowStnu,
    access: dict[str, EnablingStn],
    trbac: TrbacModel,
    window: TimeWindow,
    choices: dict[str, tuple[int, int]] | None = None,
    auto_choose: bool = False,
) -> Configuration:
    """Merge the workflow STNU with the per-role enabling STNs on the shared
    origin, bracketing every task by its chosen enabling interval.

    Tasks whose role has several in-window intervals need an explicit
    (index, displacement) choice unless auto_choose is set, in which case
    candidates are tried chronologically and the first assignment whose
    configuration passes the width precheck and the controllability check
    is kept (bounded search; the last combination wins if none passes).
    """
    choices = choices or {}
    points = list(wf.stnu.points)
    links = [l for l in wf.stnu.base.links]
    for net in access.values():
        for p in net.points:
            if p not in points:
                points.append(p)
        links.extend(net.links)

    fixed: dict[str, IntervalPoints] = {}
    open_tasks: list[tuple[str, list[IntervalPoints]]] = []
    assert wf.workflow is not None
    role_of = {t.name: t.role for t in wf.workflow.tasks}
    for task in wf.workflow.tasks:
        net = access.get(task.role)
        if net is None or not net.intervals:
            raise NoEnablingInterval(task.name)
        candidates = tuple(sorted(net.intervals, key=lambda iv: iv.lo))
        picked = _pick_interval(task.name, candidates, choices.get(task.name), auto_choose)
        if picked is None:
            # widest-fitting candidates first within chronological order
            fitting = [iv for iv in candidates if iv.hi - iv.lo >= task.upper]
            rest = [iv for iv in candidates if iv not in fitting]
            open_tasks.append((task.name, fitting + rest))
        else:
            fixed[task.name] = picked

    def build(assignment: dict[str, IntervalPoints]) -> Configuration:
        all_links = list(links)
        enabling = {}
        for name, iv in assignment.items():
            role = role_of[name]
            enabling[name] = TaskEnabling(iv.start, iv.end, (role,), iv.hi - iv.lo)
            a, c = wf.task_points[name]
            all_links.append(RequirementLink(iv.start, a, Fraction(0), INF, (role,)))
            all_links.append(RequirementLink(c, iv.end, Fraction(0), INF, (role,)))
        stnu = make_stnu(points, all_links, wf.stnu.contingents)
        config = Configuration(
            stnu=stnu,
            auth={},
            task_points=dict(wf.task_points),
            enabling=enabling,
            users=tuple(trbac.users) + (WF_USER,),
            workflow=wf.workflow,
        )
        return derive_authorized(config, trbac)

    if not open_tasks:
        return build(fixed)

    from itertools import product

    attempts = 0
    config = None
    for combo in product(*(cands for _, cands in open_tasks)):
        assignment = dict(fixed)
        assignment.update({name: iv for (name, _), iv in zip(open_tasks, combo)})
        config = build(assignment)
        attempts += 1
        if not precheck_enabling_width(config) and check_dynamic_controllability(config.stnu).controllable:
            return config
        if attempts >= 24:
            break
    return config


def precheck_enabling_width(config: Configuration) -> list[str]:
    """Every task whose enabling interval is narrower than its maximal
    duration makes the configuration uncontrollable; report them all."""
    violations = []
    for c in config.stnu.contingents:
        task = next(t for t, (a, _) in config.task_points.items() if a == c.activation)
        width = config.enabling[task].width
        if width < c.upper:
            violations.append(
                f"{task}: enabling interval width {width} is narrower than the maximal duration {c.upper}"
            )
    return violations


def derive_authorized(config: Configuration, trbac: TrbacModel) -> Configuration:
    """Authorized users per point: task points get the users of the labeled
    connecting roles intersected with the task's permission assignment;
    every other point belongs to the engine user."""
    auth: dict[TimePointId, tuple[AuthEntry, ...]] = {}
    task_of_point: dict[TimePointId, str] = {}
    for task, (a, c) in config.task_points.items():
        task_of_point[a] = task
        task_of_point[c] = task
    for p in config.stnu.points:
        task = task_of_point.get(p)
        if task is None:
            auth[p] = (AuthEntry(WF_USER),)
            continue
        allowed_roles = [r for r in config.enabling[task].roles if (r, task) in trbac.pa]
        users = sorted({u for r in allowed_roles for u in trbac.users_of_role(r)})
        if not users:
            raise EmptyAuthorizedSet(f"no user can execute {task}")
        auth[p] = tuple(AuthEntry(u) for u in users)
    return Configuration(
        stnu=config.stnu,
        auth=auth,
        task_points=config.task_points,
        enabling=config.enabling,
        users=config.users,
        workflow=config.workflow,
    )


def check_configuration(config: Configuration):
    """Enabling-width precheck plus the controllability verdict."""
    return precheck_enabling_width(config), check_dynamic_controllability(config.stnu)
