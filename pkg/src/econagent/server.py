"""HTTP service: sessions, step-event streams, datasets and tool listings.

Sessions live in process memory for the service lifetime.  Each session is
single-writer: concurrent messages to the same session queue on its lock.
Step events stream as server-sent events, with a JSON polling fallback on
the same endpoint (``?after=N``).
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse

from .agent import (
    FailureSummary,
    FinalReport,
    create_session,
    handle_followup,
    resolve_backend,
    run_request,
)
from .agent.session import Session, SessionConfig
from .errors import UnknownBackendError
from .tools.builtins import default_registry

MAX_UPLOAD_BYTES = 256 * 1024 * 1024

_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]+")


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "./data"
    max_sessions: int = 64
    backend: str = "scripted"
    fixtures: Optional[str] = None
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.max_sessions < 1:
            raise ValueError("max_sessions must be at least 1")


def create_app(config: ServerConfig) -> FastAPI:
    app = FastAPI(title="econagent", docs_url=None, redoc_url=None)
    # Browser front ends are served from their own origin (static file host),
    # so the API answers cross-origin requests. The service binds loopback by
    # default and holds no credentials, hence the wildcard.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = default_registry()
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    data_dir = Path(config.data_dir)

    def make_session() -> Session:
        backend = resolve_backend(config.backend, config.fixtures)
        return create_session(
            backend,
            registry=registry,
            config=SessionConfig(max_retries=config.max_retries, data_dir=str(data_dir)),
        )

    def get_session(session_id: str) -> Session:
        with sessions_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session '{session_id}'")
        return session

    # ---------------------------------------------------------------- sessions

    @app.post("/sessions", status_code=201)
    def create() -> dict:
        with sessions_lock:
            if len(sessions) >= config.max_sessions:
                raise HTTPException(status_code=503, detail="session limit reached")
            try:
                session = make_session()
            except (UnknownBackendError, OSError, ValueError) as exc:
                raise HTTPException(status_code=500, detail=str(exc))
            sessions[session.session_id] = session
        return {"id": session.session_id}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict) -> dict:
        session = get_session(session_id)
        text = str(body.get("text", "")).strip()
        if not text:
            raise HTTPException(status_code=422, detail="message text is required")
        with session.lock:
            if not session.request_text:
                result = run_request(session, text)
            else:
                result = handle_followup(session, text)
        payload: dict = {
            "accepted": True,
            "plan": session.plan.to_json_obj() if session.plan else None,
        }
        if isinstance(result, FinalReport):
            payload["result"] = {"kind": "report", "json_text": result.json_text}
        elif isinstance(result, FailureSummary):
            payload["result"] = {
                "kind": "failure",
                "subtask_id": result.subtask_id,
                "errors": list(result.errors),
            }
        return payload

    @app.get("/sessions/{session_id}/plan")
    def get_plan(session_id: str) -> dict:
        session = get_session(session_id)
        return {"plan": session.plan.to_json_obj() if session.plan else None}

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, request: Request, after: int = 0):
        session = get_session(session_id)
        accept = request.headers.get("accept", "")
        if "text/event-stream" not in accept:
            events = [e.to_json_obj() for e in session.events_after(after)]
            return JSONResponse({"events": events})

        def stream():
            last = after
            idle_polls = 0
            while True:
                fresh = session.events_after(last)
                for event in fresh:
                    last = event.seq
                    data = json.dumps(event.to_json_obj())
                    yield f"id: {event.seq}\nevent: {event.kind}\ndata: {data}\n\n"
                if fresh:
                    idle_polls = 0
                    continue
                idle_polls += 1
                if session.status == "idle" and idle_polls > 20:
                    yield "event: stream_idle\ndata: {}\n\n"
                    idle_polls = 0
                time.sleep(0.05)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str) -> Response:
        session = get_session(session_id)
        for name, content, media_type in reversed(session.artifacts):
            if name == "result.json":
                return PlainTextResponse(content, media_type=media_type)
        raise HTTPException(status_code=404, detail="no result yet")

    # ---------------------------------------------------------------- datasets

    @app.post("/datasets")
    def upload_dataset(file: UploadFile) -> dict:
        filename = Path(file.filename or "upload").name
        if not filename.lower().endswith(".csv"):
            raise HTTPException(status_code=415, detail="only CSV uploads are accepted")
        content = file.file.read(MAX_UPLOAD_BYTES + 1)
        if len(content) > MAX_UPLOAD_BYTES:
            raise HTTPException(status_code=413, detail="upload exceeds the 256 MB cap")
        safe = _SAFE_NAME.sub("_", filename)
        data_dir.mkdir(parents=True, exist_ok=True)
        (data_dir / safe).write_bytes(content)
        return {"name": safe}

    # ------------------------------------------------------------------- tools

    @app.get("/tools")
    def list_tools() -> dict:
        return {"tools": [d.to_json_obj() for d in registry.descriptors()]}

    return app


def serve(config: ServerConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
