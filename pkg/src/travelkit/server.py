"""HTTP facade hosting planning sessions over the simulated services.

Endpoints:
  GET  /tools/health
  POST /sessions                  {"query": str, "image": str|null, "config": {...}|null}
  GET  /sessions/{id}/trace
  GET  /sessions/{id}/plan
  POST /sessions/{id}/refine      {"new_budget"|"lock"|"exclude"|"shift_window": ...}

Bodies and responses use the canonical record encoding. Sessions are
isolated: each id maps to its own trace history and nothing is shared.
"""

from __future__ import annotations

import logging
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .agent import RefineError, SessionConfig, SessionTrace, refine_session, run_session
from .model import ImageRef, write_text_atomic, encode_line
from .solver.planner import itinerary_to_record
from .solver import kernel
from .tools import CityFixtures

log = logging.getLogger("travelkit.server")


def _error(status: int, message: str, field: str | None = None) -> JSONResponse:
    body = {"error": message}
    if field is not None:
        body["field"] = field
    return JSONResponse(status_code=status, content=body)


def create_app(fixtures: CityFixtures, session_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="travelkit", version=__version__)
    sessions: dict[str, list[SessionTrace]] = {}
    app.state.sessions = sessions

    def _persist(session_id: str) -> None:
        if session_dir is None:
            return
        trace = sessions[session_id][-1]
        write_text_atomic(Path(session_dir) / f"{session_id}.json", encode_line(trace.to_record()) + "\n")

    @app.middleware("http")
    async def request_logging(request: Request, call_next):
        request_id = uuid.uuid4().hex[:12]
        response = await call_next(request)
        log.info("request_id=%s %s %s -> %s", request_id, request.method, request.url.path, response.status_code)
        response.headers["x-request-id"] = request_id
        return response

    @app.get("/tools/health")
    async def health():
        return {"status": "ok", "version": __version__, "kernel": kernel.backend_name}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        query = body.get("query", "")
        image = body.get("image")
        if not isinstance(query, str):
            return _error(400, "query must be a string", field="query")
        if image is not None and not isinstance(image, str):
            return _error(400, "image must be an image uri string", field="image")
        if not query and image is None:
            return _error(400, "provide a query, an image, or both", field="query")
        config = SessionConfig.from_record(body.get("config") or {})
        visual = None
        if image is not None:
            poi_id = fixtures.image_index.get(image)
            kind = "street"
            if poi_id is not None:
                poi = fixtures.store[poi_id]
                kind = next((i.kind for i in poi.images if i.uri == image), "street")
            visual = ImageRef(uri=image, kind=kind)
        trace = run_session(query, visual, fixtures=fixtures, config=config)
        session_id = uuid.uuid4().hex
        sessions[session_id] = [trace]
        _persist(session_id)
        return {"session_id": session_id, "outcome": trace.outcome}

    def _get(session_id: str) -> list[SessionTrace] | None:
        return sessions.get(session_id)

    @app.get("/sessions/{session_id}/trace")
    async def get_trace(session_id: str):
        history = _get(session_id)
        if history is None:
            return _error(404, f"unknown session {session_id}")
        return history[-1].to_record()

    @app.get("/sessions/{session_id}/plan")
    async def get_plan(session_id: str):
        history = _get(session_id)
        if history is None:
            return _error(404, f"unknown session {session_id}")
        trace = history[-1]
        return {
            "outcome": trace.outcome,
            "itinerary": itinerary_to_record(trace.itinerary) if trace.itinerary else None,
            "verdicts": list(trace.verdicts),
            "summary": list(trace.summary),
        }

    @app.post("/sessions/{session_id}/refine")
    async def refine(session_id: str, request: Request):
        history = _get(session_id)
        if history is None:
            return _error(404, f"unknown session {session_id}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        try:
            refined = refine_session(history[-1], body)
        except RefineError as exc:
            return _error(400, str(exc))
        history.append(refined)
        _persist(session_id)
        return refined.to_record()

    return app


def serve(fixtures: CityFixtures, host: str = "127.0.0.1", port: int = 8040, session_dir=None) -> None:
    """Run the service until interrupted; uvicorn handles graceful shutdown."""
    import uvicorn

    uvicorn.run(create_app(fixtures, session_dir=session_dir), host=host, port=port, log_level="info")
