"""Temporal RBAC fragment: users/roles/permissions plus periodic role enabling.

Only non-conflicting complementary periodic enable-events are supported;
disabling is implicit in the interval complements and never materialized.
Role triggers, runtime requests, and explicit disable events are recorded
when present in a document so the validator can reject them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError
from .periodic import (
    DateHour,
    EnablingStn,
    PeriodicExpression,
    TimeWindow,
    parse_date,
    parse_periodic_expression,
    periodic_to_stn,
    spanned_intervals,
)

WF_USER = "wf"


@dataclass(frozen=True)
class PeriodicEvent:
    begin: DateHour
    end: DateHour | None
    expression: PeriodicExpression
    role: str


@dataclass(frozen=True)
class TrbacModel:
    users: tuple[str, ...]
    roles: tuple[str, ...]
    perms: tuple[str, ...]
    ua: frozenset[tuple[str, str]]
    pa: frozenset[tuple[str, str]]
    reb: tuple[PeriodicEvent, ...]
    unsupported: tuple[str, ...] = ()  # constructs outside the fragment, for the validator

    def users_of_role(self, role: str) -> list[str]:
        return sorted(u for u, r in self.ua if r == role)

    def roles_for_task(self, task: str) -> list[str]:
        return sorted(r for r, t in self.pa if t == task)


def parse_trbac(doc: dict) -> TrbacModel:
    try:
        users = tuple(doc["users"])
        roles = tuple(doc["roles"])
        ua = frozenset((u, r) for u, r in doc.get("ua", []))
        pa = frozenset((r, t) for r, t in doc.get("pa", []))
        reb_doc = doc.get("reb", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad access-control document: {exc}", "trbac") from exc
    unsupported = []
    for key in ("triggers", "requests"):
        if doc.get(key):
            unsupported.append(key)
    reb = []
    for i, entry in enumerate(reb_doc):
        where = f"reb[{i}]"
        if "disable" in entry:
            unsupported.append(f"{where}: explicit disable event")
            continue
        if "enable" not in entry:
            raise ParseError("periodic event needs an 'enable' role", where)
        interval = entry.get("interval", {})
        begin = parse_date(interval["begin"])
        end_text = interval.get("end", "inf")
        end = None if end_text in ("inf", None) else parse_date(end_text)
        expr = parse_periodic_expression(entry["expression"])
        reb.append(PeriodicEvent(begin, end, expr, entry["enable"]))
    perms = tuple(doc.get("perms") or sorted({t for _, t in pa}))
    return TrbacModel(users, roles, perms, ua, pa, tuple(reb), tuple(unsupported))


@dataclass
class ValidationReport:
    valid: bool
    issues: list[str] = field(default_factory=list)


def _overlap(a, b) -> bool:
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    return lo < hi  # shared interior, not a mere touching endpoint


def validate_trbac(model: TrbacModel, window: TimeWindow | None = None) -> ValidationReport:
    """Fragment validation: referential integrity plus non-interference of
    the enabling intervals each role gets inside the window."""
    issues = list(f"unsupported construct: {u}" for u in model.unsupported)
    if WF_USER in model.users:
        issues.append(f"user name {WF_USER!r} is reserved for the engine")
    for u, r in sorted(model.ua):
        if u not in model.users:
            issues.append(f"ua references unknown user {u!r}")
        if r not in model.roles:
            issues.append(f"ua references unknown role {r!r}")
    for r, t in sorted(model.pa):
        if r not in model.roles:
            issues.append(f"pa references unknown role {r!r}")
        if t not in model.perms:
            issues.append(f"pa references unknown task {t!r}")
    for i, ev in enumerate(model.reb):
        if ev.role not in model.roles:
            issues.append(f"reb[{i}] enables unknown role {ev.role!r}")
    if window is not None:
        by_role: dict[str, list[tuple]] = {}
        for i, ev in enumerate(model.reb):
            clipped = window.clip(ev.begin, ev.end)
            try:
                ivs = spanned_intervals(ev.expression, clipped)
            except Exception as exc:  # window problems are reported, not raised
                issues.append(f"reb[{i}]: {exc}")
                continue
            by_role.setdefault(ev.role, []).extend((lo, hi, i) for lo, hi in ivs)
        for role, ivs in by_role.items():
            ivs.sort()
            for a, b in zip(ivs, ivs[1:]):
                if _overlap(a, b):
                    issues.append(
                        f"role {role!r}: enabling intervals [{a[0]},{a[1]}] and "
                        f"[{b[0]},{b[1]}] overlap (events {a[2]} and {b[2]})"
                    )
                    break
    return ValidationReport(not issues, issues)


def enabling_networks(model: TrbacModel, window: TimeWindow) -> dict[str, EnablingStn]:
    """Per-role enabling STNs over the window, with interval point metadata.

    Points are renamed by REB event position: the sole in-window interval of
    event i becomes P{i}S / P{i}E, further intervals P{i}.{j}S / P{i}.{j}E.
    """
    out: dict[str, EnablingStn] = {}
    for i, ev in enumerate(model.reb, start=1):
        net = periodic_to_stn(ev.expression, window.clip(ev.begin, ev.end))
        renames = {}
        for j, iv in enumerate(net.intervals, start=1):
            stem = f"P{i}" if len(net.intervals) == 1 else f"P{i}.{j}"
            renames[iv.start] = f"{stem}S"
            renames[iv.end] = f"{stem}E"
        points = tuple(renames.get(p, p) for p in net.points)
        links = tuple(
            type(l)(renames.get(l.src, l.src), renames.get(l.dst, l.dst), l.lower, l.upper, l.roles)
            for l in net.links
        )
        intervals = tuple(
            type(iv)(iv.index, iv.z, renames[iv.start], renames[iv.end], iv.lo, iv.hi)
            for iv in net.intervals
        )
        renamed = EnablingStn(points, links, net.origin, intervals)
        if ev.role in out:
            prev = out[ev.role]
            merged_points = tuple(dict.fromkeys(prev.points + renamed.points))
            out[ev.role] = EnablingStn(
                merged_points, prev.links + renamed.links, prev.origin, prev.intervals + renamed.intervals
            )
        else:
            out[ev.role] = renamed
    return out
