"""Live dialog sessions over HTTP.

A session wraps one compiled dialog episode: the service replans after every
user answer and advances automatically through non-ask operators, so clients
only ever see questions (with their allowed answers) and rendered agent
messages. The pending action returned by create/reply is therefore always
ask or stop; the act turns executed along the way appear in the session
transcript.

Wire format (JSON, exact field names):

  POST /api/v1/sessions            {"spec": "<dialog text>"} | {"builtin": "<name>"}
    -> 201 {"session_id", "action", "remaining", "value", "total_cost",
       "total_utility"}
  POST /api/v1/sessions/{id}/reply {"answer": "<value>"}
    -> 200 same shape; 404/409/422 carry {"error": {"kind", "message", ...}},
       with "allowed" listed for illegal answers and "line"/"column" for
       parse errors
  GET  /api/v1/sessions/{id}
    -> 200 {"status", "action", "remaining", "value", "total_cost",
       "total_utility", "turns": [{"index", "op", "cost", "utility",
       "weight", "contribution", "kind", "message"}]}

Rationals travel as strings, "num/den" or "num" when the denominator is 1;
clients are expected to display them verbatim. total_cost and total_utility
are plain sums of executed operator costs and utilities; value additionally
applies the objective's per-turn discount weights, matching the executor's
episode accounting exactly. An ask turn's message is the prompt, a newline,
then the user's answer (prompts cannot contain newlines, so the split is
unambiguous). The GET body is a complete snapshot: the transcript plus the
same pending action the last create/reply returned, so a client can rebuild
its whole view from it.

Sessions live in memory behind per-session locks, expire after a
configurable idle timeout, and may append their transcripts to one file per
session id. Session ids carry 128 bits of randomness.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .dialog import (
    BUILTIN_SPECS,
    Advisory,
    DialogSpec,
    Slot,
    compile_dialog,
    render_message,
)
from .execution import replan_step
from .limits import LimitExceededError
from .model import PartialState, apply, format_rational
from .textio import SourceError, parse_dialog_spec

__all__ = ["DEFAULT_ADDR", "DEFAULT_PORT", "create_app", "serve"]

DEFAULT_ADDR = "127.0.0.1"
DEFAULT_PORT = 8750
DEFAULT_IDLE_TIMEOUT = 1800.0


class _Session:
    def __init__(self, sid: str, ds: DialogSpec, pr, idle_timeout: float):
        self.id = sid
        self.ds = ds
        self.pr = pr
        self.state = pr.s0
        self.remaining = pr.k
        self.slot_bindings: dict[str, str] = {}
        self.turns: list[dict] = []
        self.status = "awaiting_user"
        self.pending: Optional[Slot] = None
        self.pending_op: Optional[str] = None
        self.value = Fraction(0)
        self.total_cost = Fraction(0)
        self.total_utility = Fraction(0)
        self.gamma = pr.objective.effective_gamma
        self.weight = Fraction(1)
        self.lock = threading.Lock()
        self.idle_timeout = idle_timeout
        self.deadline = time.monotonic() + idle_timeout
        self.ask_slots = {f"ask_{s.name}": s for s in ds.slots}
        self.advisories: dict[str, Advisory] = {
            f"advise_{a.name}": a for a in ds.advisories
        }

    def touch(self):
        self.deadline = time.monotonic() + self.idle_timeout

    def expire_if_idle(self):
        if self.status != "finished" and time.monotonic() > self.deadline:
            self.status = "finished"
            self.pending = None
            self.pending_op = None


class _Store:
    def __init__(self, idle_timeout: float, persist_dir: Optional[str]):
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        self.idle_timeout = idle_timeout
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir is not None:
            self.persist_dir.mkdir(parents=True, exist_ok=True)

    def create(self, ds: DialogSpec, pr) -> _Session:
        sid = secrets.token_urlsafe(16)
        sess = _Session(sid, ds, pr, self.idle_timeout)
        with self._lock:
            self._sessions[sid] = sess
        return sess

    def get(self, sid: str) -> Optional[_Session]:
        with self._lock:
            return self._sessions.get(sid)

    def persist(self, sess: _Session, record: dict):
        if self.persist_dir is None:
            return
        path = self.persist_dir / f"{sess.id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")


def _error(status: int, kind: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"kind": kind, "message": message, **extra}}
    return JSONResponse(status_code=status, content=body)


def _action_json(sess: _Session) -> dict:
    if sess.pending is None:
        return {"kind": "stop"}
    return {
        "kind": "ask",
        "slot": sess.pending.name,
        "prompt": sess.pending.prompt,
        "answers": list(sess.pending.answers),
    }


def _session_json(sess: _Session) -> dict:
    return {
        "session_id": sess.id,
        "action": _action_json(sess),
        "remaining": sess.remaining,
        "value": format_rational(sess.value),
        "total_cost": format_rational(sess.total_cost),
        "total_utility": format_rational(sess.total_utility),
    }


def _record_turn(store: _Store, sess: _Session, op, kind: str, message: str, observed):
    turn = {
        "index": len(sess.turns),
        "op": op.name,
        "cost": format_rational(op.cost),
        "utility": format_rational(op.utility),
        "weight": format_rational(sess.weight),
        "contribution": format_rational((op.utility - op.cost) * sess.weight),
        "kind": kind,
        "message": message,
    }
    sess.turns.append(turn)
    sess.value += (op.utility - op.cost) * sess.weight
    sess.total_cost += op.cost
    sess.total_utility += op.utility
    sess.weight *= sess.gamma
    sess.state = observed
    sess.remaining -= 1
    store.persist(sess, {"event": "turn", **turn})


def _advance(store: _Store, sess: _Session):
    """Replan and execute non-ask operators until a question, a stop, or an
    exhausted horizon."""
    while True:
        if sess.remaining == 0:
            break
        op_name = replan_step(
            sess.pr, sess.state, sess.remaining,
            global_offset=len(sess.turns), solver="dp",
        )
        if op_name is None:
            break
        slot = sess.ask_slots.get(op_name)
        if slot is not None:
            sess.pending = slot
            sess.pending_op = op_name
            sess.status = "awaiting_user"
            return
        op = sess.pr.operator(op_name)
        advisory = sess.advisories.get(op_name)
        message = (
            render_message(advisory.message_template, sess.slot_bindings)
            if advisory is not None
            else ""
        )
        _record_turn(store, sess, op, "act", message, apply(op, sess.state))
    sess.pending = None
    sess.pending_op = None
    sess.status = "finished"
    store.persist(
        sess, {"event": "finished", "value": format_rational(sess.value)}
    )


async def _json_body(request: Request) -> Optional[dict]:
    try:
        payload = await request.json()
    except Exception:
        return None
    return payload if isinstance(payload, dict) else None


def create_app(
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
    persist_dir: Optional[str] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    """Build the session API application.

    ui_dir, when given, is served as static files under / so a browser
    client can live next to the API; the API works identically without it.
    """
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
    store = _Store(idle_timeout, persist_dir)
    app.state.store = store

    @app.post("/api/v1/sessions", status_code=201)
    async def create_session(request: Request):
        payload = await _json_body(request)
        if payload is None:
            return _error(422, "bad_request", "request body must be a JSON object")
        spec_text = payload.get("spec")
        builtin = payload.get("builtin")
        if (spec_text is None) == (builtin is None):
            return _error(
                422, "bad_request", 'provide exactly one of "spec" or "builtin"'
            )
        if builtin is not None:
            if not isinstance(builtin, str) or builtin not in BUILTIN_SPECS:
                known = ", ".join(sorted(BUILTIN_SPECS))
                return _error(
                    422, "unknown_builtin",
                    f"unknown builtin {builtin!r} (known: {known})",
                )
            ds = BUILTIN_SPECS[builtin]
        else:
            if not isinstance(spec_text, str):
                return _error(422, "bad_request", '"spec" must be a string')
            try:
                ds = parse_dialog_spec(spec_text)
            except SourceError as exc:
                return _error(
                    422, "parse", str(exc), line=exc.line, column=exc.column
                )
        try:
            pr = compile_dialog(ds)
        except LimitExceededError as exc:
            return _error(422, "limit", str(exc))
        sess = store.create(ds, pr)
        with sess.lock:
            _advance(store, sess)
            sess.touch()
            return JSONResponse(status_code=201, content=_session_json(sess))

    @app.post("/api/v1/sessions/{session_id}/reply")
    async def reply(session_id: str, request: Request):
        sess = store.get(session_id)
        if sess is None:
            return _error(404, "not_found", f"no session {session_id!r}")
        payload = await _json_body(request)
        if payload is None or not isinstance(payload.get("answer"), str):
            return _error(422, "bad_request", 'body must carry a string "answer"')
        answer = payload["answer"]
        with sess.lock:
            sess.expire_if_idle()
            if sess.status == "finished" or sess.pending is None:
                return _error(409, "conflict", "session is finished")
            slot = sess.pending
            if answer not in slot.answers:
                return _error(
                    422, "illegal_answer",
                    f"{answer!r} is not an answer of slot '{slot.name}'",
                    allowed=list(slot.answers),
                )
            op = sess.pr.operator(sess.pending_op)
            observed = apply(op, sess.state).updated(
                PartialState.of({f"slot_{slot.name}": answer})
            )
            sess.slot_bindings[slot.name] = answer
            message = f"{slot.prompt}\n{answer}"
            sess.pending = None
            sess.pending_op = None
            _record_turn(store, sess, op, "ask", message, observed)
            _advance(store, sess)
            sess.touch()
            return JSONResponse(status_code=200, content=_session_json(sess))

    @app.get("/api/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        sess = store.get(session_id)
        if sess is None:
            return _error(404, "not_found", f"no session {session_id!r}")
        with sess.lock:
            sess.expire_if_idle()
            return {
                "status": sess.status,
                "action": _action_json(sess),
                "remaining": sess.remaining,
                "value": format_rational(sess.value),
                "total_cost": format_rational(sess.total_cost),
                "total_utility": format_rational(sess.total_utility),
                "turns": [dict(t) for t in sess.turns],
            }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(
    addr: str = DEFAULT_ADDR,
    port: int = DEFAULT_PORT,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
    persist_dir: Optional[str] = None,
    ui_dir: Optional[str] = None,
):
    """Run the API under uvicorn until interrupted."""
    import uvicorn

    app = create_app(idle_timeout=idle_timeout, persist_dir=persist_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=addr, port=port, log_level="warning")
