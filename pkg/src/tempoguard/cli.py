"""Command-line gateway: check, simulate, replay, autorun, serve.

Exit codes: 0 ok, 1 check failure, 2 execution violation, 3 I/O or parse
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bundle import build_configuration, build_rules, cross_validate, load_bundle
from .configuration import precheck_enabling_width
from .errors import EngineError, ParseError, ViolationError
from .executor import (
    auto_run,
    parse_scenario,
    policy_violations,
    run_scenario,
    validate_schedule,
)
from .stnu import check_dynamic_controllability
from .trbac import validate_trbac
from .workflow import validate_structured

OK, CHECK_FAILED, EXECUTION_VIOLATION, IO_ERROR = 0, 1, 2, 3


def _load(args):
    return load_bundle(args.bundle)


def cmd_check(args) -> int:
    bundle = _load(args)
    failed = False

    def report(name, ok, detail=""):
        nonlocal failed
        failed = failed or not ok
        suffix = f" ({detail})" if detail else ""
        print(f"{name}: {'ok' if ok else 'FAIL'}{suffix}")

    structure = validate_structured(bundle.workflow)
    report("workflow-structure", structure.valid, "; ".join(structure.issues))
    fragment = validate_trbac(bundle.trbac, bundle.window)
    report("trbac-fragment", fragment.valid, "; ".join(fragment.issues))
    cross = cross_validate(bundle)
    report("cross-references", not cross, "; ".join(cross))
    if failed:
        return CHECK_FAILED

    config = build_configuration(bundle)
    width = precheck_enabling_width(config)
    report("interval-width", not width, "; ".join(width))
    verdict = check_dynamic_controllability(config.stnu)
    report("dynamic-controllability", verdict.controllable,
           "" if verdict.controllable else f"witness cycle {'->'.join(verdict.witness)}")
    for task, (a, c) in sorted(config.task_points.items()):
        users = ",".join(e.user for e in config.auth[a])
        print(f"authorized[{task}]: {{{users}}}")
    rules = build_rules(bundle, config)
    print(f"rules: {len(rules.rules)} compiled")
    report("safeness", rules.safe)
    if args.rules_out:
        Path(args.rules_out).write_text(json.dumps([r.to_json() for r in rules.rules], indent=1))
    return CHECK_FAILED if failed else OK


def _prepare(args):
    bundle = _load(args)
    config = build_configuration(bundle)
    rules = build_rules(bundle, config)
    return bundle, config, rules


def cmd_simulate(args) -> int:
    bundle, config, rules = _prepare(args)
    doc = bundle.scenario_doc
    if args.scenario:
        doc = json.loads(Path(args.scenario).read_text())
    if doc is None:
        print("no scenario: pass --scenario FILE or add scenario.json to the bundle", file=sys.stderr)
        return IO_ERROR
    result = run_scenario(config, rules, parse_scenario(doc, config))
    trace = list(result.state.trace)
    if args.out:
        Path(args.out).write_text(json.dumps(trace, indent=1, sort_keys=True) + "\n")
    else:
        for entry in trace:
            print(f"({entry['user']}:{entry['point']}={entry['time']})")
    if not result.ok:
        where = f" at step {result.failed_step}" if result.failed_step is not None else ""
        print(f"aborted{where}: {result.error.code}: {result.error}", file=sys.stderr)
        return EXECUTION_VIOLATION
    print(f"completed: {len(trace)} records", file=sys.stderr)
    return OK


def cmd_replay(args) -> int:
    bundle, config, rules = _prepare(args)
    trace = json.loads(Path(args.trace).read_text())
    issues = validate_schedule(config, trace)
    for issue in issues:
        print(f"schedule: {issue}")
    steps = [
        {"user": e["user"], "point": e["point"], "time": e["time"]}
        for e in trace
        if e["user"] != "wf" or e["point"] not in _auto_points(config, rules)
    ]
    wf_choices = {
        e["point"]: e["time"]
        for e in trace
        if e["user"] == "wf" and e["point"] not in _auto_points(config, rules)
    }
    doc = {"steps": [s for s in steps if s["user"] != "wf"], "wfChoices": wf_choices}
    result = run_scenario(config, rules, parse_scenario(doc, config))
    if issues or not result.ok:
        if result.error:
            print(f"replay: {result.error.code}: {result.error}", file=sys.stderr)
        return EXECUTION_VIOLATION
    print("replay: ok", file=sys.stderr)
    return OK


def _auto_points(config, rules):
    from .executor import init

    return set(init(config, rules, warn_on_uncontrollable=False).auto_times)


def cmd_autorun(args) -> int:
    bundle, config, rules = _prepare(args)
    if args.no_rules:
        from .security import RuleSet

        rules = RuleSet.checked([])
    failures = 0
    for seed in range(args.seed, args.seed + args.runs):
        result = auto_run(config, rules, seed)
        if result.ok:
            violations = policy_violations(config, bundle.policies, result.state.trace)
            flat = [f"{k}: {v}" for k, vs in violations.items() for v in vs]
            status = "; ".join(flat) if flat else "clean"
            print(f"seed {seed}: completed, {status}")
            if flat and not args.no_rules:
                failures += 1
        else:
            print(f"seed {seed}: {result.state.status} ({result.error})")
            failures += 1
    return EXECUTION_VIOLATION if failures else OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bundle = _load(args)
    app = create_app(bundle, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tempoguard")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_bundle(p):
        p.add_argument("--bundle", required=True, help="directory with workflow/trbac/window/policies JSON")
        return p

    p = with_bundle(sub.add_parser("check", help="validate documents, controllability, users, rules"))
    p.add_argument("--rules-out", help="write compiled rules JSON here")
    p.set_defaults(fn=cmd_check)

    p = with_bundle(sub.add_parser("simulate", help="run a scripted scenario"))
    p.add_argument("--scenario", help="scenario JSON (defaults to bundle scenario.json)")
    p.add_argument("--out", help="write the trace JSON here")
    p.set_defaults(fn=cmd_simulate)

    p = with_bundle(sub.add_parser("replay", help="validate and re-execute a trace file"))
    p.add_argument("--trace", required=True)
    p.set_defaults(fn=cmd_replay)

    p = with_bundle(sub.add_parser("autorun", help="seeded automatic executions"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--no-rules", action="store_true", help="drop the propagation rules")
    p.set_defaults(fn=cmd_autorun)

    p = with_bundle(sub.add_parser("serve", help="start the session HTTP service"))
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built UI assets to mount at /ui")
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return IO_ERROR
    except ViolationError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXECUTION_VIOLATION
    except EngineError as exc:
        print(f"check failure: {exc.code}: {exc}", file=sys.stderr)
        return CHECK_FAILED
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
