"""Shared construction of the case-study bundle used across test modules."""

import json
from pathlib import Path

from tempoguard.configuration import Configuration, connect
from tempoguard.periodic import TimeWindow, parse_date
from tempoguard.security import compile_policies, parse_policies
from tempoguard.trbac import TrbacModel, enabling_networks, parse_trbac
from tempoguard.workflow import Workflow, parse_workflow, workflow_to_stnu

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CASESTUDY = FIXTURES / "casestudy"


def load(name: str):
    return json.loads((CASESTUDY / name).read_text())


def case_window() -> TimeWindow:
    doc = load("window.json")
    return TimeWindow(parse_date(doc["begin"]), parse_date(doc["end"]))


def case_trbac() -> TrbacModel:
    return parse_trbac(load("trbac.json"))


def case_workflow() -> Workflow:
    return parse_workflow(load("workflow.json"))


def case_configuration() -> Configuration:
    trbac = case_trbac()
    window = case_window()
    mapping = workflow_to_stnu(case_workflow())
    return connect(mapping, enabling_networks(trbac, window), trbac, window)


def case_rules(config=None):
    config = config or case_configuration()
    return compile_policies(parse_policies(load("policies.json")), config)


def case_scenario():
    return load("scenario.json")
