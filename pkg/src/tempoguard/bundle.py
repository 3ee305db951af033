"""Project bundles: the document set the gateway loads and cross-validates."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .configuration import Configuration, connect
from .errors import ParseError
from .periodic import TimeWindow, parse_date
from .security import RuleSet, compile_policies, parse_policies
from .trbac import TrbacModel, enabling_networks, parse_trbac
from .workflow import Workflow, parse_workflow, workflow_to_stnu


@dataclass
class ProjectBundle:
    workflow: Workflow
    trbac: TrbacModel
    window: TimeWindow
    policies: list
    scenario_doc: dict | None = None
    interval_choices: dict | None = None


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"missing document {path.name}", str(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", str(path))


def load_bundle(directory: str | Path) -> ProjectBundle:
    d = Path(directory)
    workflow = parse_workflow(_read_json(d / "workflow.json"))
    trbac = parse_trbac(_read_json(d / "trbac.json"))
    win_doc = _read_json(d / "window.json")
    window = TimeWindow(
        parse_date(win_doc["begin"]),
        None if win_doc.get("end") in (None, "inf") else parse_date(win_doc["end"]),
        parse_date(win_doc["origin"]) if win_doc.get("origin") else None,
    )
    policies_path = d / "policies.json"
    policies = parse_policies(_read_json(policies_path)) if policies_path.exists() else []
    scenario_path = d / "scenario.json"
    scenario_doc = _read_json(scenario_path) if scenario_path.exists() else None
    choices = win_doc.get("intervalChoices")
    return ProjectBundle(workflow, trbac, window, policies, scenario_doc, choices)


def cross_validate(bundle: ProjectBundle) -> list[str]:
    """Referential checks across documents: tasks named by pa, roles on
    tasks, and tasks/blocks named by policies must exist and be granted."""
    from .security import OneTaskAtATime, TSoD
    from .workflow import parallel_blocks

    issues = []
    tasks = {t.name for t in bundle.workflow.tasks}
    for r, t in sorted(bundle.trbac.pa):
        if t not in tasks:
            issues.append(f"pa grants {r!r} the unknown task {t!r}")
    for t in bundle.workflow.tasks:
        if t.role not in bundle.trbac.roles:
            issues.append(f"task {t.name!r} names unknown role {t.role!r}")
        elif (t.role, t.name) not in bundle.trbac.pa:
            issues.append(f"role {t.role!r} lacks the permission for task {t.name!r}")
    n_blocks = len(parallel_blocks(bundle.workflow.root))
    for policy in bundle.policies:
        if isinstance(policy, TSoD):
            for name in (policy.from_task, policy.to_task):
                if name not in tasks:
                    issues.append(f"policy references unknown task {name!r}")
        elif isinstance(policy, OneTaskAtATime) and not (1 <= policy.block <= n_blocks):
            issues.append(f"policy references parallel block #{policy.block}, workflow has {n_blocks}")
    return issues


def build_configuration(bundle: ProjectBundle) -> Configuration:
    mapping = workflow_to_stnu(bundle.workflow)
    access = enabling_networks(bundle.trbac, bundle.window)
    return connect(
        mapping,
        access,
        bundle.trbac,
        bundle.window,
        choices=bundle.interval_choices,
        auto_choose=bundle.interval_choices is None,
    )


def build_rules(bundle: ProjectBundle, config: Configuration) -> RuleSet:
    return compile_policies(bundle.policies, config)
