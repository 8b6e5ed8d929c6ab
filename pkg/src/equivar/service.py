"""HTTP front end over scenarios, verification, and forecasting sessions.

Design rules:
- Verification responses and transcripts are rendered by the shared
  serializers and returned byte for byte, so the CLI's --json output and
  the corresponding response bodies are identical documents.
- Verifications that finish within 100ms return directly; slower ones get
  a 202 with a poll URL.
- Malformed bodies are 400 (including framework validation), unknown
  resources 404, rounds against closed or busy sessions 409, and probes the
  translation cannot carry over 422 with an explanation.
"""

from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import nir as nirlib
from .errors import (
    AmbiguousTranslation,
    EquivarError,
    ParseError,
    SessionClosed,
    StateSpaceTooLarge,
    UnknownScenario,
    UnknownVariable,
)
from .scenarios import ScenarioFile, builtin, builtin_names, make_braking_dataset
from .serialize import action_to_dict, compound_from_obj, dumps, report_to_dict
from .turing import TuringSession, transcript, verdict_to_dict
from .verify import (
    verify_brute,
    verify_ci_preservation,
    verify_markov_local,
    verify_region,
)

SYNC_WINDOW = 0.1  # seconds a verification may take before it becomes a job
MAX_FINISHED_JOBS = 100

_ERROR_STATUS = (
    (AmbiguousTranslation, 422, "ambiguous_translation"),
    (SessionClosed, 409, "session_closed"),
    (UnknownScenario, 404, "unknown_scenario"),
    (UnknownVariable, 400, "unknown_variable"),
    (StateSpaceTooLarge, 400, "state_space_too_large"),
    (ParseError, 400, "parse_error"),
)


def _error_payload(kind: str, message: str) -> dict:
    return {"error": {"type": kind, "message": message}}


async def _json_body(request: Request) -> dict:
    try:
        payload = await request.json()
    except Exception:
        raise ParseError("request body must be a JSON object") from None
    if not isinstance(payload, dict):
        raise ParseError("request body must be a JSON object")
    return payload


class _Sessions:
    """In-memory session table with lazy TTL eviction and per-session locks."""

    def __init__(self, ttl: float):
        self.ttl = ttl
        self._table: dict[str, dict] = {}
        self._guard = threading.Lock()

    def _evict(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, e in self._table.items()
                if now - e["touched"] > self.ttl]
        for sid in dead:
            del self._table[sid]

    def create(self, session: TuringSession) -> str:
        sid = uuid.uuid4().hex
        with self._guard:
            self._evict()
            self._table[sid] = {
                "session": session,
                "lock": threading.Lock(),
                "touched": time.monotonic(),
            }
        return sid

    def get(self, sid: str) -> dict:
        with self._guard:
            self._evict()
            entry = self._table.get(sid)
            if entry is None:
                raise UnknownScenario(f"no session {sid!r}")
            entry["touched"] = time.monotonic()
            return entry


class _Persister:
    """Append-only JSON-lines audit log of session events."""

    def __init__(self, path):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()

    def write(self, event: dict) -> None:
        if self.path is None:
            return
        import json

        line = json.dumps(event, separators=(",", ":"))
        with self._lock:
            with self.path.open("a") as fh:
                fh.write(line + "\n")


def _run_verification(scenario: ScenarioFile, payload: dict) -> dict:
    mode = payload.get("mode", "brute")
    machine, human, t = scenario.machine, scenario.human, scenario.translation
    tolerance = float(payload.get("tolerance", 1e-9))
    if mode == "brute":
        report = verify_brute(
            machine, human, t,
            action_family=payload.get("action_family", "both"),
            max_compound=int(payload.get("max_compound", 1)),
            tolerance=tolerance,
        )
    elif mode == "ci":
        report = verify_ci_preservation(machine, human, t)
    elif mode == "markov":
        report = verify_markov_local(machine, human, t, tolerance=tolerance)
    elif mode == "region":
        spec = payload.get("region")
        if spec is None:
            declared = scenario.metadata.get("region", {})
            spec = declared.get("actions")
            if "tolerance" not in payload and "tolerance" in declared:
                tolerance = float(declared["tolerance"])
        if not spec:
            raise ParseError("region mode needs a region: [actions...] field")
        region = [compound_from_obj(a, machine.system, f"region[{i}]")
                  for i, a in enumerate(spec)]
        report = verify_region(machine, human, t, region, tolerance=tolerance)
    else:
        raise ParseError(f"mode: expected brute|ci|markov|region, got {mode!r}")
    return report_to_dict(report)


def create_app(session_ttl: float = 3600.0, persist_path=None,
               static_dir=None) -> FastAPI:
    app = FastAPI(title="equivar", docs_url=None, redoc_url=None)
    state = app.state
    state.scenario_cache = {}
    state.scenario_lock = threading.Lock()
    state.sessions = _Sessions(session_ttl)
    state.persister = _Persister(persist_path)
    state.executor = ThreadPoolExecutor(max_workers=2)
    state.jobs = {}
    state.jobs_lock = threading.Lock()
    state.nir_cache = {}
    state.nir_lock = threading.Lock()

    def scenario_of(name) -> ScenarioFile:
        if not isinstance(name, str):
            raise ParseError("scenario: expected a builtin scenario name")
        with state.scenario_lock:
            if name not in state.scenario_cache:
                state.scenario_cache[name] = builtin(name)
            return state.scenario_cache[name]

    for cls, status, kind in _ERROR_STATUS:
        def handler(request, exc, status=status, kind=kind):
            return JSONResponse(_error_payload(kind, str(exc)), status_code=status)

        app.add_exception_handler(cls, handler)

    def gone_wrong(request, exc):
        return JSONResponse(_error_payload("error", str(exc)), status_code=400)

    app.add_exception_handler(EquivarError, gone_wrong)

    def bad_value(request, exc):
        return JSONResponse(
            _error_payload("invalid_value", str(exc)), status_code=400
        )

    app.add_exception_handler(ValueError, bad_value)

    def bad_request(request, exc):
        return JSONResponse(
            _error_payload("invalid_request", str(exc)), status_code=400
        )

    app.add_exception_handler(RequestValidationError, bad_request)

    # -- scenarios ---------------------------------------------------------

    @app.get("/api/scenarios")
    def list_scenarios():
        out = []
        for name in builtin_names():
            sc = scenario_of(name)
            out.append({
                "name": sc.name,
                "description": sc.metadata.get("description", ""),
                "equivariance": sc.metadata.get("equivariance", "none"),
                "machine_variables": [
                    {"name": v.name, "domain": list(v.domain)}
                    for v in sc.machine.system.variables
                ],
                "human_variables": [
                    {"name": v.name, "domain": list(v.domain)}
                    for v in sc.human.system.variables
                ],
                "has_mixture": sc.mixture is not None,
                "has_nir": sc.nir is not None,
                "metadata": sc.metadata,
            })
        return {"scenarios": out}

    # -- verification ------------------------------------------------------

    @app.post("/api/verify")
    async def post_verify(request: Request):
        payload = await _json_body(request)
        scenario = scenario_of(payload.get("scenario"))
        if payload.get("mode", "brute") not in ("brute", "ci", "markov", "region"):
            raise ParseError(f"mode: expected brute|ci|markov|region,"
                             f" got {payload.get('mode')!r}")
        future = state.executor.submit(_run_verification, scenario, payload)
        job_id = uuid.uuid4().hex
        with state.jobs_lock:
            state.jobs[job_id] = future
            while len(state.jobs) > MAX_FINISHED_JOBS:
                oldest = next(iter(state.jobs))
                if not state.jobs[oldest].done():
                    break
                del state.jobs[oldest]
        try:
            doc = future.result(timeout=SYNC_WINDOW)
        except FutureTimeout:
            return JSONResponse(
                {"job": job_id, "poll": f"/api/verify/jobs/{job_id}"},
                status_code=202,
            )
        return Response(content=dumps(doc), media_type="application/json")

    @app.get("/api/verify/jobs/{job_id}")
    def poll_verify(job_id: str):
        with state.jobs_lock:
            future = state.jobs.get(job_id)
        if future is None:
            return JSONResponse(
                _error_payload("unknown_job", f"no verification job {job_id!r}"),
                status_code=404,
            )
        if not future.done():
            return JSONResponse({"status": "running"}, status_code=202)
        doc = future.result()  # re-raises into the error handlers
        return Response(content=dumps(doc), media_type="application/json")

    # -- forecasting sessions -----------------------------------------------

    @app.post("/api/sessions")
    async def create_session(request: Request):
        payload = await _json_body(request)
        scenario = scenario_of(payload.get("scenario"))
        query = payload.get("query")
        if not isinstance(query, str):
            raise ParseError("query: expected a human-side variable name")
        seed = payload.get("seed", 0)
        if not isinstance(seed, int):
            raise ParseError("seed: expected an integer")
        session = TuringSession(scenario, query, seed)
        sid = state.sessions.create(session)
        state.persister.write({
            "event": "created", "session": sid, "scenario": scenario.name,
            "query": query, "seed": seed,
        })
        return {
            "session_id": sid,
            "scenario": scenario.name,
            "query": query,
            "seed": seed,
            "domain": list(session.query_domain),
        }

    @app.post("/api/sessions/{sid}/round")
    async def post_round(sid: str, request: Request):
        payload = await _json_body(request)
        entry = state.sessions.get(sid)
        if "action" not in payload:
            raise ParseError("round: missing action")
        if "forecast" not in payload:
            raise ParseError("round: missing forecast")
        if not entry["lock"].acquire(blocking=False):
            return JSONResponse(
                _error_payload("busy", "another round is in flight"),
                status_code=409,
            )
        try:
            session: TuringSession = entry["session"]
            actions = compound_from_obj(payload["action"],
                                        session.scenario.machine.system, "action")
            result = session.play_round(actions, payload["forecast"])
        finally:
            entry["lock"].release()
        msys = session.scenario.machine.system
        hsys = session.scenario.human.system
        state.persister.write({
            "event": "round", "session": sid, "round": result.index,
            "truth": result.truth, "score": result.score,
        })
        return {
            "round": result.index,
            "action": [action_to_dict(a, msys) for a in result.action],
            "translated": [action_to_dict(a, hsys) for a in result.translated],
            "truth": result.truth,
            "score": result.score,
            "running_mean": session.mean_score(),
        }

    @app.get("/api/sessions/{sid}")
    def get_transcript(sid: str):
        entry = state.sessions.get(sid)
        return Response(content=dumps(transcript(entry["session"])),
                        media_type="application/json")

    @app.get("/api/sessions/{sid}/verdict")
    def get_verdict(sid: str, threshold: float = 0.9, min_rounds: int = 10):
        entry = state.sessions.get(sid)
        return verdict_to_dict(entry["session"].verdict(threshold, min_rounds))

    @app.post("/api/sessions/{sid}/close")
    def close_session(sid: str):
        entry = state.sessions.get(sid)
        entry["session"].close()
        state.persister.write({"event": "closed", "session": sid})
        return {"status": "closed"}

    # -- neural inspector ----------------------------------------------------

    def trained_nir(name: str):
        scenario = scenario_of(name)
        if scenario.nir is None:
            raise ParseError(f"scenario {name!r} has no neural block")
        with state.nir_lock:
            if name not in state.nir_cache:
                cfg = scenario.nir
                ds = make_braking_dataset(
                    n=cfg["dataset"]["size"],
                    seed=cfg["dataset"]["seed"],
                    input_dim=cfg["input_dim"],
                )
                train_ds, _ = ds.split(cfg["dataset"]["train_fraction"])
                model = nirlib.make_nir_model(
                    cfg["input_dim"], tuple(cfg["concepts"]),
                    hidden=tuple(cfg["hidden"]), seed=cfg["train"]["seed"],
                )
                tc = nirlib.TrainConfig(
                    learning_rate=cfg["train"]["learning_rate"],
                    epochs=cfg["train"]["epochs"],
                    batch_size=cfg["train"]["batch_size"],
                    concept_weight=cfg["train"]["concept_weight"],
                    seed=cfg["train"]["seed"],
                )
                trained, trace = nirlib.train(model, train_ds, tc)
                state.nir_cache[name] = (trained, ds, trace)
            return state.nir_cache[name]

    @app.get("/api/nir/{name}")
    def nir_info(name: str):
        scenario = scenario_of(name)
        if scenario.nir is None:
            raise ParseError(f"scenario {name!r} has no neural block")
        return {
            "scenario": name,
            "config": scenario.nir,
            "trained": name in state.nir_cache,
        }

    @app.post("/api/nir/whatif")
    async def nir_whatif(request: Request):
        payload = await _json_body(request)
        name = payload.get("scenario")
        model, _, _ = trained_nir(name if isinstance(name, str) else "")
        x = payload.get("input")
        if not isinstance(x, list) or len(x) != model.trunk.input_dim:
            raise ParseError(
                f"input: expected {model.trunk.input_dim} numbers"
            )
        x = np.asarray([float(v) for v in x])
        base = nirlib.contributions(model, x)
        response = {
            "scenario": name,
            "concepts": base["concepts"],
            "weights": base["weights"],
            "bias": base["bias"],
            "terms": base["terms"],
            "y_hat": base["y_hat"],
        }
        edits = payload.get("weight_edits") or {}
        if not isinstance(edits, dict):
            raise ParseError("weight_edits: expected {concept: new_weight}")
        if edits:
            names = list(model.concept_names)
            by_index = {}
            for concept, value in edits.items():
                if concept not in names:
                    raise ParseError(f"weight_edits: unknown concept {concept!r}")
                by_index[names.index(concept)] = float(value)
            _, w, y = nirlib.execute_edited(model, x, by_index)
            response["edited"] = {
                "weights": {n: float(w[j]) for j, n in enumerate(names)},
                "y_hat": y,
            }
        return response

    # -- schema and static UI -------------------------------------------------

    @app.get("/api/schema")
    def schema():
        return {
            "endpoints": {
                "GET /api/scenarios": "list bundled scenarios",
                "POST /api/verify": {
                    "body": {
                        "scenario": "name",
                        "mode": "brute|ci|markov|region",
                        "action_family": "observe|do|both (brute)",
                        "max_compound": "int (brute)",
                        "region": "[action...] (region)",
                        "tolerance": "float",
                    },
                    "returns": "report, or 202 {job, poll} when slow",
                },
                "GET /api/verify/jobs/{id}": "poll a slow verification",
                "POST /api/sessions": {
                    "body": {"scenario": "name", "query": "variable", "seed": "int"},
                },
                "POST /api/sessions/{id}/round": {
                    "body": {
                        "action": "{observe|do: {variable: value}} or a list",
                        "forecast": "label or {label: probability}",
                    },
                },
                "GET /api/sessions/{id}": "transcript (replayable)",
                "GET /api/sessions/{id}/verdict": "score summary",
                "POST /api/sessions/{id}/close": "finish the session",
                "GET /api/nir/{scenario}": "neural block config",
                "POST /api/nir/whatif": {
                    "body": {
                        "scenario": "name",
                        "input": "[float...]",
                        "weight_edits": "{concept: new_weight}",
                    },
                },
            },
            "action_format": {"observe": {"variable": "value"}},
            "errors": {
                "400": "malformed request",
                "404": "unknown scenario, session, or job",
                "409": "closed session or concurrent round",
                "422": "action has no usable translation",
            },
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return (
                "<!doctype html><title>equivar</title>"
                "<h1>equivar service</h1>"
                "<p>No UI bundle configured. The API lives under"
                " <code>/api</code>; see <a href='/api/schema'>/api/schema</a>.</p>"
            )

    return app


def run(host: str = "127.0.0.1", port: int = 8000, session_ttl: float = 3600.0,
        persist_path=None, static_dir=None) -> None:
    import uvicorn

    app = create_app(session_ttl=session_ttl, persist_path=persist_path,
                     static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
