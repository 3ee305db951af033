"""Security constraints, their interpretation, and propagation rules.

A constraint blocks a user while current time satisfies it. Absolute
constraints (t_k, op) compare the clock against a known instant; relative
constraints (X + k, op) reference a yet-unexecuted point and carry a fixed
truth value until X executes, at which moment they reduce to absolute form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bounds import Bound, fmt, fr
from .errors import NotAParallelBlock, NotType2, UnknownTask, UnsafeRuleSet
from .stn import TimePointId

OPS = (">", "<", ">=", "<=", "=", "!=")

# Truth value of a relative constraint while its point is unexecuted:
# the clock can never already exceed a future instant, so >, >=, = are
# false and <, <=, != are true.
_PENDING_TRUTH = {">": False, ">=": False, "=": False, "<": True, "<=": True, "!=": True}


@dataclass(frozen=True)
class AbsoluteConstraint:
    """t_k together with a comparison against current time."""

    bound: Bound
    op: str

    def __post_init__(self):
        _check_op(self.op)
        if self.bound < 0:
            raise ValueError(f"constraint instant {self.bound} must be >= 0")

    def text(self) -> str:
        return f"{fmt(self.bound)},{self.op}"


@dataclass(frozen=True)
class RelativeConstraint:
    """X + k together with a comparison; reducible once X executes."""

    point: TimePointId
    offset: Bound
    op: str

    def __post_init__(self):
        _check_op(self.op)
        if self.offset < 0:
            raise ValueError(f"constraint offset {self.offset} must be >= 0")

    def text(self) -> str:
        k = self.offset
        return f"{self.point}+{fmt(k)},{self.op}" if k else f"{self.point},{self.op}"


SecurityConstraint = AbsoluteConstraint | RelativeConstraint


def _check_op(op):
    if op not in OPS:
        raise ValueError(f"unknown comparison {op!r}")


def satisfies(t, c: SecurityConstraint) -> bool:
    """Interpretation of a constraint at current time t."""
    if isinstance(c, RelativeConstraint):
        return _PENDING_TRUTH[c.op]
    t = fr(t)
    k = c.bound
    return {
        ">": t > k,
        "<": t < k,
        ">=": t >= k,
        "<=": t <= k,
        "=": t == k,
        "!=": t != k,
    }[c.op]


def reduce_relative(c: SecurityConstraint, value_of_point) -> AbsoluteConstraint:
    """Substitute the executed time of the referenced point, keeping the op."""
    if not isinstance(c, RelativeConstraint):
        raise NotType2(f"{c} is not a relative constraint")
    return AbsoluteConstraint(fr(value_of_point) + c.offset, c.op)


@dataclass(frozen=True)
class AuthEntry:
    user: str
    constraint: SecurityConstraint | None = None

    def text(self) -> str:
        return f"{self.user}<{self.constraint.text() if self.constraint else ''}>"


def is_blocked(entry: AuthEntry, t) -> bool:
    return entry.constraint is not None and satisfies(t, entry.constraint)


SAME = "="
DIFFERENT = "!="


@dataclass(frozen=True)
class PropagationRule:
    """When guard executes, set constraint on target entries whose user is
    equal to (mode '=') or different from (mode '!=') the executor."""

    guard: TimePointId
    constraint: SecurityConstraint
    targets: frozenset[TimePointId]
    mode: str

    def __post_init__(self):
        if self.mode not in (SAME, DIFFERENT):
            raise ValueError(f"mode must be '=' or '!=', got {self.mode!r}")
        if not self.targets:
            raise ValueError("rule needs at least one target point")

    def to_json(self) -> dict:
        return {
            "guard": self.guard,
            "constraint": constraint_to_json(self.constraint),
            "targets": sorted(self.targets),
            "mode": "same" if self.mode == SAME else "different",
        }


def constraint_to_json(c: SecurityConstraint | None):
    if c is None:
        return None
    if isinstance(c, AbsoluteConstraint):
        return {"kind": "absolute", "bound": fmt(c.bound), "op": c.op}
    return {"kind": "relative", "point": c.point, "offset": fmt(c.offset), "op": c.op}


def constraint_from_json(doc) -> SecurityConstraint | None:
    if doc is None:
        return None
    if doc["kind"] == "absolute":
        return AbsoluteConstraint(fr(doc["bound"]), doc["op"])
    return RelativeConstraint(doc["point"], fr(doc["offset"]), doc["op"])


def conflicting(r1: PropagationRule, r2: PropagationRule) -> bool:
    """Same guard, different constraint, overlapping targets, same mode."""
    return (
        r1.guard == r2.guard
        and r1.constraint != r2.constraint
        and bool(r1.targets & r2.targets)
        and r1.mode == r2.mode
    )


def safeness_check(rules) -> bool:
    """Pairwise conflict scan over every unordered pair."""
    rules = list(rules)
    for i in range(len(rules)):
        for j in range(i + 1, len(rules)):
            if conflicting(rules[i], rules[j]):
                return False
    return True


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[PropagationRule, ...]
    safe: bool

    @classmethod
    def checked(cls, rules) -> "RuleSet":
        rules = tuple(rules)
        return cls(rules, safeness_check(rules))

    def require_safe(self):
        if not self.safe:
            raise UnsafeRuleSet("rule set contains a conflicting pair")

    def with_guard(self, point: TimePointId):
        return [r for r in self.rules if r.guard == point]


# --- policy declarations -----------------------------------------------------

@dataclass(frozen=True)
class OwnerEnds:
    """Whoever starts a task must be the one ending it."""


@dataclass(frozen=True)
class OneTaskAtATime:
    """No user may run two tasks of a parallel block concurrently."""

    block: int = 1  # 1-based preorder index of the parallel block


@dataclass(frozen=True)
class TSoD:
    """Same user may do both tasks only after resting `rest` hours."""

    from_task: str
    to_task: str
    rest: Bound = Fraction(0)


PolicyDecl = OwnerEnds | OneTaskAtATime | TSoD


def compile_policy(policy: PolicyDecl, config) -> list[PropagationRule]:
    """Translate a policy into propagation rules over the configuration's points."""
    task_points = config.task_points
    if isinstance(policy, OwnerEnds):
        return [
            PropagationRule(a, RelativeConstraint(c, Fraction(0), "<="), frozenset({c}), DIFFERENT)
            for a, c in (task_points[t.name] for t in config.workflow.tasks)
        ]
    if isinstance(policy, OneTaskAtATime):
        from .workflow import parallel_blocks, task_leaves

        blocks = parallel_blocks(config.workflow.root)
        if not (1 <= policy.block <= len(blocks)):
            raise NotAParallelBlock(f"no parallel block #{policy.block}")
        members = [t.name for t in task_leaves(blocks[policy.block - 1])]
        rules = []
        for ti in members:
            for tj in members:
                if ti == tj:
                    continue
                ai, ci = task_points[ti]
                aj, _ = task_points[tj]
                rules.append(PropagationRule(ai, RelativeConstraint(ci, Fraction(0), "<="), frozenset({aj}), SAME))
        return rules
    if isinstance(policy, TSoD):
        for name in (policy.from_task, policy.to_task):
            if name not in task_points:
                raise UnknownTask(name)
        _, ci = task_points[policy.from_task]
        aj, _ = task_points[policy.to_task]
        return [PropagationRule(ci, RelativeConstraint(ci, fr(policy.rest), "<="), frozenset({aj}), SAME)]
    raise TypeError(f"unknown policy {policy!r}")


def parse_policies(doc) -> list[PolicyDecl]:
    out = []
    for entry in doc:
        kind = entry.get("kind")
        if kind == "owner-ends":
            out.append(OwnerEnds())
        elif kind == "one-task-at-a-time":
            out.append(OneTaskAtATime(int(entry.get("block", 1))))
        elif kind == "tsod":
            out.append(TSoD(entry["from"], entry["to"], fr(entry.get("rest", 0))))
        else:
            raise ValueError(f"unknown policy kind {kind!r}")
    return out


def compile_policies(policies, config) -> RuleSet:
    rules = []
    for p in policies:
        rules.extend(compile_policy(p, config))
    return RuleSet.checked(rules)
