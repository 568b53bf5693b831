"""Session state: loaded tables, the active plan, and the event log."""

from __future__ import annotations

import itertools
import json
import threading
import uuid
from dataclasses import dataclass, field
from typing import Any, Optional

from ..table import DataTable
from ..tools.registry import ToolRegistry
from .backend import ChatBackend
from .plan import Plan
from .report import FinalReport


@dataclass(frozen=True)
class SessionConfig:
    """Knobs that stay fixed for the life of a session."""

    max_retries: int = 3
    data_dir: Optional[str] = None
    lag_indexing: str = "zero_based"


@dataclass
class Event:
    """One append-only log entry; ``seq`` is unique and increasing per session."""

    seq: int
    kind: str
    payload: dict

    def to_json_obj(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}


@dataclass
class Session:
    """Mutable workbench state threaded through the orchestrator."""

    backend: ChatBackend
    registry: ToolRegistry
    config: SessionConfig = field(default_factory=SessionConfig)
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    tables: dict[str, DataTable] = field(default_factory=dict)
    active_table: Optional[str] = None
    plan: Optional[Plan] = None
    request_text: str = ""
    report: Optional[FinalReport] = None
    status: str = "idle"
    history: list[dict] = field(default_factory=list)
    artifacts: list[tuple[str, str, str]] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    _seq: "itertools.count[int]" = field(default_factory=lambda: itertools.count(1))
    lock: threading.Lock = field(default_factory=threading.Lock)

    # ----------------------------------------------------------------- tables

    def put_table(self, table: DataTable, make_active: bool = True) -> str:
        name = table.name or f"table_{len(self.tables) + 1}"
        if table.name != name:
            table = DataTable(table.columns, table.notes, name)
        self.tables[name] = table
        if make_active:
            self.active_table = name
        return name

    def get_table(self, name: Optional[str] = None) -> DataTable:
        key = name or self.active_table
        if key is None or key not in self.tables:
            loaded = ", ".join(sorted(self.tables)) or "none"
            raise KeyError(f"no table named {key!r} is loaded (loaded: {loaded})")
        return self.tables[key]

    # ------------------------------------------------------------ history log

    def record(self, role: str, content: str) -> None:
        """Append one chat turn; history is append-only by construction."""
        self.history.append({"role": role, "content": content})

    def add_artifact(self, name: str, content: str, media_type: str) -> None:
        self.artifacts.append((name, content, media_type))

    # ----------------------------------------------------------------- events

    def emit(self, kind: str, payload: Optional[dict] = None) -> Event:
        event = Event(next(self._seq), kind, _jsonable(payload or {}))
        self.events.append(event)
        return event

    def events_after(self, after: int) -> list[Event]:
        return [e for e in self.events if e.seq > after]


def _jsonable(payload: dict) -> dict:
    """Force payloads down to plain JSON types so the event log always serializes."""
    return json.loads(json.dumps(payload, default=str))


def create_session(
    backend: ChatBackend,
    registry: Optional[ToolRegistry] = None,
    config: Optional[SessionConfig] = None,
) -> Session:
    from ..tools.builtins import default_registry

    return Session(
        backend=backend,
        registry=registry if registry is not None else default_registry(),
        config=config or SessionConfig(),
    )
