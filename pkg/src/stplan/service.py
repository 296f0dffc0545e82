"""HTTP API around the engine, serving the decision-maker console.

One instance per app; sessions are created over it and survive for the
process lifetime. Payloads are plain JSON; errors use a uniform
{code, message, pointer} body with 409 for protocol-order violations and 422
for invalid labels. Each session is serialized by its own lock, so concurrent
requests against one session cannot interleave mid-transition.
"""
from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import compromise, io as stio, objectives, solver
from .dashboard import full_report, table_rows
from .drsa import FORMULATIONS, DecisionRule
from .lp import BudgetBounds, build_program, check_allocation, solve_lp
from .model import Strategy
from .scenarios import expected_instance
from .session import (EMPTY_REGION, ImoSession, LabelError, ProtocolError,
                      DEFAULT_SAMPLE_SIZE)

OBJECTIVE_KINDS = ("overall", "cpl", "cpo", "cpol", "cpk")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, pointer: str = ""):
        super().__init__(message)
        self.status = status
        self.body = {"code": code, "message": message, "pointer": pointer}


def _strategy_json(bundle, strategy: Strategy) -> list[dict]:
    return stio.serialize_strategy(strategy, bundle.instance)["activations"]


def _dashboard_json(bundle, strategy: Strategy) -> list[dict]:
    tables = full_report(bundle.instance, strategy, bundle.stakeholders)
    out = []
    for table in tables:
        rows = list(table_rows(bundle.instance, table, bundle.stakeholders))
        out.append({"name": table.name, "header": rows[0],
                    "rows": [[*r[:-1], float(r[-1])] for r in rows[1:]]})
    return out


def _rule_json(session: ImoSession, index: int, rule: DecisionRule) -> dict:
    conds = [{"objective": session.objectives[o].name, "objective_index": o,
              "threshold": t} for o, t in rule.conditions]
    sentence = " and ".join(f"{c['objective']} >= {c['threshold']:g}" for c in conds)
    return {"id": f"R{index + 1}", "conditions": conds,
            "support": [f"ST{i + 1}" for i in sorted(rule.support)],
            "sentence": f"if {sentence}, then the strategy is good"}


def _sample_json(bundle, session: ImoSession) -> list[dict]:
    out = []
    for k, (strategy, vector) in enumerate(session.current().sample):
        out.append({"id": f"ST{k + 1}",
                    "vector": [float(x) for x in vector],
                    "activations": _strategy_json(bundle, strategy)})
    return out


def _session_json(bundle, sid: str, session: ImoSession) -> dict:
    doc: dict[str, Any] = {
        "id": sid,
        "state": session.state,
        "formulation": session.formulation,
        "iteration": len(session.iterations),
        "objective_names": [o.name for o in session.objectives],
        "constraints": [c.name for c in session.constraints],
        "journal": session.journal(),
    }
    if session.state != EMPTY_REGION and session.iterations:
        doc["sample"] = _sample_json(bundle, session)
        it = session.current()
        if it.rules:
            doc["rules"] = [_rule_json(session, k, r) for k, r in enumerate(it.rules)]
    return doc


def create_app(bundle: stio.InstanceBundle, sample_size: int = DEFAULT_SAMPLE_SIZE,
               guard: float = 1e9) -> FastAPI:
    app = FastAPI(title="stplan workbench", docs_url=None, redoc_url=None)
    # the console is a static page, so requests arrive cross-origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    sessions: dict[str, ImoSession] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    async def parse_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiError(400, "bad_json", f"request body is not valid JSON: {exc}",
                           "") from exc
        if not isinstance(body, dict):
            raise ApiError(400, "bad_json", "request body must be a JSON object", "")
        return body

    def body_field(body: dict, key: str, typ, pointer: str):
        if not isinstance(body, dict) or key not in body:
            raise ApiError(400, "missing_field", f"request body needs {key!r}", pointer)
        value = body[key]
        if not isinstance(value, typ):
            raise ApiError(400, "bad_field", f"{key!r} has the wrong type", pointer)
        return value

    def get_session(sid: str) -> tuple[ImoSession, threading.Lock]:
        session = sessions.get(sid)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {sid!r}", "")
        return session, locks[sid]

    @app.get("/instance")
    def instance():
        return stio.serialize_bundle(bundle)

    @app.post("/solve")
    async def solve(request: Request):
        body = await parse_body(request)
        kind = body_field(body, "objective", str, "/objective")
        if kind not in OBJECTIVE_KINDS:
            raise ApiError(400, "bad_objective",
                           f"objective must be one of {OBJECTIVE_KINDS}", "/objective")
        expected = body.get("expected", False)
        continuous = body.get("continuous", False)
        inst = bundle.instance
        if expected:
            if not bundle.trees:
                raise ApiError(400, "no_uncertainty",
                               "instance has no uncertainty block", "/expected")
            inst = expected_instance(inst, bundle.trees)
        if continuous:
            if kind != "overall":
                raise ApiError(400, "bad_objective",
                               "continuous solves use the overall objective", "/objective")
            program = build_program(inst, bundle.bounds or BudgetBounds())
            allocation, value = solve_lp(program)
            report = check_allocation(inst, bundle.bounds or BudgetBounds(), allocation)
            return {"value": value,
                    "allocation": [{"facility": inst.facilities[i],
                                    "location": inst.locations[l],
                                    "period": t, "amount": amt}
                                   for i, l, t, amt in allocation.nonzero()],
                    "feasible": report.feasible}
        if kind == "overall":
            res = solver.maximize(inst, objectives.overall_objective(inst))
            strategy, value = res.strategy, res.objective_value
            deviations = None
        else:
            if kind == "cpk" and bundle.stakeholders is None:
                raise ApiError(400, "no_stakeholders",
                               "instance has no stakeholder block", "/objective")
            result = compromise.solve_cp(inst, kind.upper(), bundle.stakeholders)
            strategy, value = result.strategy, result.minimax
            deviations = {str(k): v for k, v in result.deviations.items()}
        out = {"strategy": _strategy_json(bundle, strategy), "value": value,
               "dashboard": _dashboard_json(bundle, strategy)}
        if deviations is not None:
            out["deviations"] = deviations
        return out

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await parse_body(request)
        formulation = body_field(body, "formulation", str, "/formulation")
        if formulation not in FORMULATIONS:
            raise ApiError(400, "bad_formulation",
                           f"formulation must be one of {FORMULATIONS}", "/formulation")
        if bundle.thresholds is None:
            raise ApiError(400, "no_thresholds",
                           "instance has no thresholds block", "/formulation")
        k = body.get("sample_size", sample_size)
        if not isinstance(k, int) or k < 1:
            raise ApiError(400, "bad_field", "sample_size must be a positive integer",
                           "/sample_size")
        with registry_lock:
            sid = f"session-{len(sessions) + 1}"
            sessions[sid] = ImoSession(bundle.instance, formulation, bundle.thresholds,
                                       k=k, guard=guard)
            locks[sid] = threading.Lock()
        return _session_json(bundle, sid, sessions[sid])

    @app.get("/sessions/{sid}")
    def session_state(sid: str):
        session, lock = get_session(sid)
        with lock:
            return _session_json(bundle, sid, session)

    @app.post("/sessions/{sid}/labels")
    async def submit_labels(sid: str, request: Request):
        session, lock = get_session(sid)
        body = await parse_body(request)
        raw = body_field(body, "labels", dict, "/labels")
        with lock:
            ids = {f"ST{k + 1}": k for k in range(len(session.current().sample))} \
                if session.iterations else {}
            labels: dict[int, str] = {}
            for key, value in raw.items():
                if key not in ids:
                    raise ApiError(422, "unknown_strategy",
                                   f"no strategy {key!r} in the current sample",
                                   f"/labels/{key}")
                if value not in ("good", "other"):
                    raise ApiError(422, "bad_label",
                                   f"label must be good or other, got {value!r}",
                                   f"/labels/{key}")
                labels[ids[key]] = value
            try:
                rules = session.submit_labels(labels)
            except ProtocolError as exc:
                raise ApiError(409, "protocol", str(exc), "") from exc
            except LabelError as exc:
                raise ApiError(422, "bad_labels", str(exc), "/labels") from exc
            return {"state": session.state,
                    "rules": [_rule_json(session, k, r) for k, r in enumerate(rules)]}

    @app.post("/sessions/{sid}/choice")
    async def choose_rule(sid: str, request: Request):
        session, lock = get_session(sid)
        body = await parse_body(request)
        rule_id = body_field(body, "rule", str, "/rule")
        with lock:
            rules = session.current().rules if session.iterations else []
            ids = {f"R{k + 1}": k for k in range(len(rules))}
            if rule_id not in ids:
                raise ApiError(422, "unknown_rule", f"no rule {rule_id!r} in the last list",
                               "/rule")
            try:
                session.choose_rule(ids[rule_id])
            except ProtocolError as exc:
                raise ApiError(409, "protocol", str(exc), "") from exc
            doc = {"state": session.state}
            if session.state != EMPTY_REGION:
                doc["sample"] = _sample_json(bundle, session)
            return doc

    @app.post("/sessions/{sid}/satisfied")
    async def satisfied(sid: str, request: Request):
        session, lock = get_session(sid)
        body = await parse_body(request)
        strategy_id = body_field(body, "strategy", str, "/strategy")
        with lock:
            count = len(session.current().sample) if session.iterations else 0
            ids = {f"ST{k + 1}": k for k in range(count)}
            if strategy_id not in ids:
                raise ApiError(422, "unknown_strategy",
                               f"no strategy {strategy_id!r} in the current sample",
                               "/strategy")
            try:
                strategy = session.mark_satisfied(ids[strategy_id])
            except ProtocolError as exc:
                raise ApiError(409, "protocol", str(exc), "") from exc
            value = objectives.overall_objective(bundle.instance).value(strategy)
            return {"state": session.state,
                    "strategy": _strategy_json(bundle, strategy),
                    "value": value,
                    "dashboard": _dashboard_json(bundle, strategy)}

    return app
