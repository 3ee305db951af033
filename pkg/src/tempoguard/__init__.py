"""Temporal-network engine for access-controlled workflows."""

from .bounds import Bound, INF, NEG_INF, fr
from .stn import (
    ConsistencyReport,
    DistanceGraph,
    RequirementLink,
    Stn,
    assign,
    check_consistency,
    feasible_range,
    make_stn,
    to_distance_graph,
)
from .stnu import (
    ContingentLink,
    DcVerdict,
    Stnu,
    allmax_projection,
    apply_reduction_round,
    check_dynamic_controllability,
    make_stnu,
    project,
    to_labeled_distance_graph,
)
from .oracle import brute_force_dc_oracle
from .periodic import (
    PeriodicExpression,
    TimeWindow,
    displacement,
    granularity,
    parse_date,
    parse_periodic_expression,
    periodic_to_stn,
    periodicity,
    spanned_intervals,
)
from .trbac import TrbacModel, enabling_networks, parse_trbac, validate_trbac
from .workflow import Workflow, parse_workflow, validate_structured, workflow_to_stnu
from .configuration import Configuration, connect, derive_authorized, precheck_enabling_width
from .security import (
    AbsoluteConstraint,
    AuthEntry,
    PropagationRule,
    RelativeConstraint,
    RuleSet,
    compile_policies,
    compile_policy,
    conflicting,
    is_blocked,
    reduce_relative,
    safeness_check,
    satisfies,
)
from .executor import (
    ExecutionState,
    Scenario,
    advance_time,
    auto_run,
    execute_timepoint,
    init,
    live_enabled,
    observe_contingent,
    parse_scenario,
    run_scenario,
    validate_schedule,
)
from .bundle import ProjectBundle, build_configuration, build_rules, load_bundle

__all__ = [
    "Bound", "INF", "NEG_INF", "fr",
    "ConsistencyReport", "DistanceGraph", "RequirementLink", "Stn",
    "assign", "check_consistency", "feasible_range", "make_stn", "to_distance_graph",
    "ContingentLink", "DcVerdict", "Stnu", "allmax_projection",
    "apply_reduction_round", "check_dynamic_controllability", "make_stnu",
    "project", "to_labeled_distance_graph",
    "brute_force_dc_oracle",
    "PeriodicExpression", "TimeWindow", "displacement", "granularity", "parse_date",
    "parse_periodic_expression", "periodic_to_stn", "periodicity", "spanned_intervals",
    "TrbacModel", "enabling_networks", "parse_trbac", "validate_trbac",
    "Workflow", "parse_workflow", "validate_structured", "workflow_to_stnu",
    "Configuration", "connect", "derive_authorized", "precheck_enabling_width",
    "AbsoluteConstraint", "AuthEntry", "PropagationRule", "RelativeConstraint",
    "RuleSet", "compile_policies", "compile_policy", "conflicting", "is_blocked",
    "reduce_relative", "safeness_check", "satisfies",
    "ExecutionState", "Scenario", "advance_time", "auto_run", "execute_timepoint",
    "init", "live_enabled", "observe_contingent", "parse_scenario", "run_scenario",
    "validate_schedule",
    "ProjectBundle", "build_configuration", "build_rules", "load_bundle",
]
