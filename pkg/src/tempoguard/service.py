"""Session-oriented HTTP service wrapping the execution engine.

Every session owns one ExecutionState; requests against a session are
serialized by a per-session lock. States are values, so a rejected request
(409) leaves the stored state untouched. All payloads reuse the engine's
canonical JSON shapes, which keeps HTTP-driven and library-driven traces
bit-identical.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .bounds import fmt
from .bundle import ProjectBundle, build_configuration, build_rules, cross_validate
from .configuration import precheck_enabling_width
from .errors import EngineError
from .executor import (
    ExecutionState,
    advance_time,
    execute_timepoint,
    init,
    live_enabled,
    observe_contingent,
)
from .security import constraint_to_json
from .stnu import check_dynamic_controllability


def state_to_json(state: ExecutionState) -> dict:
    return {
        "now": fmt(state.now),
        "status": state.status,
        "permits": [p.to_json() for p in live_enabled(state)],
        "auth": state.auth_snapshot(),
        "pending": [
            {"point": p, "window": [fmt(s + x), fmt(s + y)]}
            for p, (s, x, y) in sorted(state.pending.items())
        ],
        "trace": list(state.trace),
        "warnings": list(state.warnings),
    }


def model_to_json(config, rules) -> dict:
    stnu = config.stnu
    return {
        "points": [
            {"id": p, "kind": stnu.kind(p), "wfOwned": config.is_wf_owned(p)}
            for p in stnu.points
        ],
        "links": [
            {
                "from": l.src,
                "to": l.dst,
                "lower": fmt(l.lower),
                "upper": fmt(l.upper),
                "roles": list(l.roles),
            }
            for l in stnu.base.links
        ],
        "contingents": [
            {
                "activation": c.activation,
                "contingent": c.contingent,
                "lower": fmt(c.lower),
                "upper": fmt(c.upper),
            }
            for c in stnu.contingents
        ],
        "auth": {
            p: [{"user": e.user, "constraint": constraint_to_json(e.constraint)} for e in entries]
            for p, entries in sorted(config.auth.items())
        },
        "rules": [r.to_json() for r in rules.rules],
        "users": list(config.users),
        "taskPoints": {t: list(pair) for t, pair in sorted(config.task_points.items())},
    }


class SessionStore:
    def __init__(self):
        self._states: dict[str, ExecutionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def create(self, state: ExecutionState) -> str:
        sid = uuid.uuid4().hex
        with self._guard:
            self._states[sid] = state
            self._locks[sid] = threading.Lock()
        return sid

    def lock(self, sid: str) -> threading.Lock:
        with self._guard:
            if sid not in self._locks:
                raise KeyError(sid)
            return self._locks[sid]

    def get(self, sid: str) -> ExecutionState:
        try:
            return self._states[sid]
        except KeyError:
            raise KeyError(sid)

    def put(self, sid: str, state: ExecutionState):
        self._states[sid] = state


def create_app(bundle: ProjectBundle, ui_dir: str | Path | None = None) -> FastAPI:
    config = build_configuration(bundle)
    issues = cross_validate(bundle) + precheck_enabling_width(config)
    if issues:
        raise EngineError("bundle fails checks: " + "; ".join(issues))
    if not check_dynamic_controllability(config.stnu).controllable:
        raise EngineError("configuration is not dynamically controllable")
    rules = build_rules(bundle, config)
    rules.require_safe()

    app = FastAPI(title="tempoguard", docs_url=None, redoc_url=None)
    store = SessionStore()

    @app.exception_handler(EngineError)
    async def engine_error(_request: Request, exc: EngineError):
        body = {"error": exc.code, "detail": str(exc)}
        constraint = getattr(exc, "constraint", None)
        if constraint is not None:
            body["constraint"] = constraint_to_json(constraint)
        return JSONResponse(status_code=409, content=body)

    def session(sid: str) -> ExecutionState:
        try:
            return store.get(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")

    @app.get("/model")
    def model():
        return model_to_json(config, rules)

    @app.post("/sessions")
    def new_session():
        sid = store.create(init(config, rules))
        return {"sessionId": sid}

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        return state_to_json(session(sid))

    def _step(sid: str, op):
        try:
            lock = store.lock(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        with lock:
            state = store.get(sid)
            next_state = op(state)  # EngineError propagates; state stays put
            store.put(sid, next_state)
            return state_to_json(next_state)

    @app.post("/sessions/{sid}/execute")
    async def post_execute(sid: str, request: Request):
        body = await request.json()
        return _step(sid, lambda s: execute_timepoint(s, body["user"], body["point"], body["time"]))

    @app.post("/sessions/{sid}/observe")
    async def post_observe(sid: str, request: Request):
        body = await request.json()
        return _step(sid, lambda s: observe_contingent(s, body["user"], body["point"], body["time"]))

    @app.post("/sessions/{sid}/advance")
    async def post_advance(sid: str, request: Request):
        body = await request.json()
        return _step(sid, lambda s: advance_time(s, body["time"]))

    @app.post("/sessions/{sid}/reset")
    def post_reset(sid: str):
        return _step(sid, lambda s: init(config, rules))

    @app.post("/sessions/{sid}/fork")
    def post_fork(sid: str):
        state = session(sid)
        return {"sessionId": store.create(state)}

    @app.get("/sessions/{sid}/export")
    def get_export(sid: str):
        state = session(sid)
        return {"trace": list(state.trace), "now": fmt(state.now), "status": state.status}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
