"""Structured workflow blocks and their STNU image.

The grammar is tasks (leaves), sequences, and parallel blocks; alternative
and conditional paths are rejected at parse time. Relative constraints add
requirement links between task start/end points without touching control
flow.

Point naming in the STNU: task i (document order) becomes Ai => Ci; the
k-th parallel block gets branch points BS/BE and join points ES/EE (the
first block unsuffixed, later ones B2S, B2E, ...). The origin Z belongs to
the network but carries no workflow link; task starts are grounded through
the access-control connections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bounds import Bound, INF, fr
from .errors import (
    DuplicateTaskName,
    InvalidRange,
    NonPositiveDuration,
    ParseError,
    UnknownTaskInRelativeConstraint,
)
from .stn import RequirementLink, TimePointId
from .stnu import ContingentLink, Stnu, make_stnu


@dataclass(frozen=True)
class Task:
    name: str
    lower: Bound
    upper: Bound
    role: str


@dataclass(frozen=True)
class Sequence:
    first: "Block"
    link: tuple[Bound, Bound]
    second: "Block"


@dataclass(frozen=True)
class Branch:
    into: tuple[Bound, Bound]
    block: "Block"
    out: tuple[Bound, Bound]


@dataclass(frozen=True)
class Parallel:
    duration: tuple[Bound, Bound]
    branches: tuple[Branch, ...]
    join: tuple[Bound, Bound]


Block = Task | Sequence | Parallel


@dataclass(frozen=True)
class RelativeConstraint:
    from_task: str
    from_side: str  # "S" start (activation) or "E" end (contingent)
    bounds: tuple[Bound, Bound]
    to_task: str
    to_side: str


@dataclass(frozen=True)
class Workflow:
    root: Block
    tasks: tuple[Task, ...]
    relative: tuple[RelativeConstraint, ...] = ()


def _range(value, where: str) -> tuple[Bound, Bound]:
    try:
        lo, hi = value
    except (TypeError, ValueError) as exc:
        raise ParseError(f"range must be a [lower, upper] pair, got {value!r}", where) from exc
    lo, hi = fr(lo), fr(hi)
    if lo > hi:
        raise InvalidRange(f"{where}: lower {lo} exceeds upper {hi}")
    return lo, hi


def parse_workflow(doc: dict) -> Workflow:
    """Parse the workflow document (see README for the schema)."""
    tasks: dict[str, Task] = {}
    for i, entry in enumerate(doc.get("tasks", [])):
        where = f"tasks[{i}]"
        try:
            name = entry["name"]
            lo, hi = fr(entry["lower"]), fr(entry["upper"])
            role = entry["role"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad task entry: {exc}", where) from exc
        if name in tasks:
            raise DuplicateTaskName(name)
        if not (0 < lo < hi < INF):
            raise NonPositiveDuration(f"{name}: duration [{lo},{hi}] must satisfy 0 < x < y < inf")
        tasks[name] = Task(name, lo, hi, role)

    def build(node, where: str) -> Block:
        if not isinstance(node, dict) or len(node) != 1:
            raise ParseError(f"structure node must have exactly one kind, got {node!r}", where)
        kind, body = next(iter(node.items()))
        if kind == "task":
            if body not in tasks:
                raise ParseError(f"structure references unknown task {body!r}", where)
            return tasks[body]
        if kind == "seq":
            return Sequence(
                build(body["first"], where + ".first"),
                _range(body["link"], where + ".link"),
                build(body["second"], where + ".second"),
            )
        if kind == "par":
            branches = tuple(
                Branch(
                    _range(b["in"], f"{where}.branches[{j}].in"),
                    build(b["block"], f"{where}.branches[{j}]"),
                    _range(b["out"], f"{where}.branches[{j}].out"),
                )
                for j, b in enumerate(body.get("branches", []))
            )
            return Parallel(_range(body["duration"], where + ".duration"), branches, _range(body["join"], where + ".join"))
        raise ParseError(f"unsupported block kind {kind!r} (choice/conditional paths are out of scope)", where)

    root = build(doc["structure"], "structure")
    relative = []
    for i, rc in enumerate(doc.get("relative", [])):
        where = f"relative[{i}]"
        for side_key in ("fromSide", "toSide"):
            if rc.get(side_key) not in ("S", "E"):
                raise ParseError(f"{side_key} must be 'S' or 'E'", where)
        relative.append(
            RelativeConstraint(
                rc["from"], rc["fromSide"], _range([rc["lower"], rc["upper"]], where), rc["to"], rc["toSide"]
            )
        )
    return Workflow(root, tuple(tasks.values()), tuple(relative))


def task_leaves(block: Block) -> list[Task]:
    if isinstance(block, Task):
        return [block]
    if isinstance(block, Sequence):
        return task_leaves(block.first) + task_leaves(block.second)
    return [t for b in block.branches for t in task_leaves(b.block)]


def parallel_blocks(block: Block) -> list[Parallel]:
    if isinstance(block, Task):
        return []
    if isinstance(block, Sequence):
        return parallel_blocks(block.first) + parallel_blocks(block.second)
    nested = [p for b in block.branches for p in parallel_blocks(b.block)]
    return [block] + nested


@dataclass
class StructureReport:
    valid: bool
    issues: list[str] = field(default_factory=list)


def validate_structured(wf: Workflow) -> StructureReport:
    """Grammar-level checks the parser cannot express type-wise."""
    issues = []
    seen = set()
    for t in task_leaves(wf.root):
        if t.name in seen:
            issues.append(f"task {t.name!r} appears twice in the structure")
        seen.add(t.name)
    for t in wf.tasks:
        if t.name not in seen:
            issues.append(f"task {t.name!r} declared but absent from the structure")
    for p in parallel_blocks(wf.root):
        if not p.branches:
            issues.append("parallel block with no branches")
    for rc in wf.relative:
        names = {t.name for t in wf.tasks}
        if rc.from_task not in names or rc.to_task not in names:
            issues.append(f"relative constraint references unknown task {rc.from_task!r}/{rc.to_task!r}")
        elif rc.from_task == rc.to_task and rc.from_side == rc.to_side:
            issues.append(f"relative constraint loops {rc.from_task!r} onto its own {rc.from_side} point")
    return StructureReport(not issues, issues)


@dataclass(frozen=True)
class WorkflowStnu:
    stnu: Stnu
    task_points: dict[str, tuple[TimePointId, TimePointId]]  # task -> (activation, contingent)
    internal_points: tuple[TimePointId, ...]
    workflow: Workflow | None = None


def workflow_to_stnu(wf: Workflow) -> WorkflowStnu:
    """Map the block tree onto an STNU (one contingent link per task)."""
    order = {t.name: i + 1 for i, t in enumerate(wf.tasks)}
    points: list[TimePointId] = ["Z"]
    links: list[RequirementLink] = []
    contingents: list[ContingentLink] = []
    task_points: dict[str, tuple[TimePointId, TimePointId]] = {}
    parallel_count = 0

    def emit(block: Block) -> tuple[TimePointId, TimePointId]:
        nonlocal parallel_count
        if isinstance(block, Task):
            a, c = f"A{order[block.name]}", f"C{order[block.name]}"
            points.extend([a, c])
            contingents.append(ContingentLink(a, c, block.lower, block.upper))
            task_points[block.name] = (a, c)
            return a, c
        if isinstance(block, Sequence):
            first_start, first_end = emit(block.first)
            second_start, second_end = emit(block.second)
            links.append(RequirementLink(first_end, second_start, *block.link))
            return first_start, second_end
        parallel_count += 1
        suffix = "" if parallel_count == 1 else str(parallel_count)
        bs, be = f"B{suffix}S", f"B{suffix}E"
        es, ee = f"E{suffix}S", f"E{suffix}E"
        points.extend([bs, be])
        links.append(RequirementLink(bs, be, *block.duration))
        for branch in block.branches:
            entry, exit_ = emit(branch.block)
            links.append(RequirementLink(be, entry, *branch.into))
            links.append(RequirementLink(exit_, es, *branch.out))
        points.extend([es, ee])
        links.append(RequirementLink(es, ee, *block.join))
        return bs, ee

    emit(wf.root)
    for rc in wf.relative:
        for name in (rc.from_task, rc.to_task):
            if name not in task_points:
                raise UnknownTaskInRelativeConstraint(name)
        src = task_points[rc.from_task][0 if rc.from_side == "S" else 1]
        dst = task_points[rc.to_task][0 if rc.to_side == "S" else 1]
        links.append(RequirementLink(src, dst, *rc.bounds))
    stnu = make_stnu(points, links, contingents)
    internal = tuple(p for p in points if p == "Z" or not any(p in pair for pair in task_points.values()))
    return WorkflowStnu(stnu, task_points, internal, wf)
