"""Chat backends: the scripted replay used offline and the live HTTP client.

A backend's ``complete`` takes an ordered message list (dicts with ``role``
and ``content``) plus optional tool schemas and returns either
``{"text": ...}`` or ``{"tool_call": {"name": ..., "args": {...}}}``.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional, Protocol, Sequence

import httpx

from ..errors import FixtureMismatchError, UnknownBackendError


class ChatBackend(Protocol):
    identity: str

    def complete(self, messages: list[dict], tool_schemas: Optional[list] = None) -> dict:
        ...


class ScriptedBackend:
    """Deterministic replay of a recorded conversation.

    The fixture is an ordered list of ``{expect_substring, reply}`` entries;
    each call must contain ``expect_substring`` in its final message or the
    replay stops with a mismatch error (a drifted pipeline must fail loudly,
    not improvise).
    """

    def __init__(self, entries: Sequence[dict], name: str = "scripted"):
        self.entries = list(entries)
        self.cursor = 0
        self.identity = name

    @staticmethod
    def from_file(path: str | Path) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValueError(f"fixture {path} must be a JSON array")
        return ScriptedBackend(data, name=f"scripted:{path}")

    def complete(self, messages: list[dict], tool_schemas: Optional[list] = None) -> dict:
        if self.cursor >= len(self.entries):
            raise FixtureMismatchError(
                f"{self.identity}: fixture exhausted after {len(self.entries)} replies"
            )
        entry = self.entries[self.cursor]
        expect = entry.get("expect_substring", "")
        last = messages[-1]["content"] if messages else ""
        if expect and expect not in last:
            raise FixtureMismatchError(
                f"{self.identity}: reply {self.cursor} expected {expect!r} "
                f"in the last message, got: {last[:200]!r}"
            )
        self.cursor += 1
        return dict(entry["reply"])

    @property
    def exhausted(self) -> bool:
        return self.cursor >= len(self.entries)


def _parameters_json_schema(parameters) -> dict:
    """Project our parameter list onto a JSON-schema object declaration."""
    props: dict = {}
    required = []
    for p in parameters:
        if p.kind == "enum":
            props[p.name] = {"type": "string", "enum": list(p.values)}
        elif p.kind == "array":
            props[p.name] = {"type": "array", "items": {"type": "string"}}
        else:
            props[p.name] = {"type": p.kind}
        if p.description:
            props[p.name]["description"] = p.description
        if p.required:
            required.append(p.name)
    return {"type": "object", "properties": props, "required": required}


class HttpChatBackend:
    """Chat-completion client speaking the common function-calling shape."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str = "",
        client: Optional[httpx.Client] = None,
        timeout: float = 120.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.client = client or httpx.Client(timeout=timeout)
        self.identity = f"live:{self.endpoint}"

    @staticmethod
    def from_env() -> "HttpChatBackend":
        endpoint = os.environ.get("ECONAGENT_LLM_ENDPOINT", "")
        if not endpoint:
            raise UnknownBackendError("live (ECONAGENT_LLM_ENDPOINT unset)")
        return HttpChatBackend(
            endpoint,
            model=os.environ.get("ECONAGENT_LLM_MODEL", "default"),
            api_key=os.environ.get("ECONAGENT_LLM_API_KEY", ""),
        )

    def complete(self, messages: list[dict], tool_schemas: Optional[list] = None) -> dict:
        body: dict = {"model": self.model, "messages": messages}
        if tool_schemas:
            body["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": d.name,
                        "description": d.summary.target_scenario if d.summary else "",
                        "parameters": _parameters_json_schema(d.parameters),
                    },
                }
                for d in tool_schemas
            ]
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        resp = self.client.post(
            f"{self.endpoint}/chat/completions", json=body, headers=headers
        )
        resp.raise_for_status()
        message = resp.json()["choices"][0]["message"]
        calls = message.get("tool_calls") or []
        if calls:
            fn = calls[0]["function"]
            raw = fn.get("arguments", "{}")
            args = json.loads(raw) if isinstance(raw, str) else dict(raw)
            return {"tool_call": {"name": fn["name"], "args": args}}
        return {"text": message.get("content") or ""}


def resolve_backend(identity: str, fixtures: Optional[str] = None) -> ChatBackend:
    """Turn a backend identity string into a backend instance.

    ``scripted`` (with a fixtures path) or ``scripted:<path>`` replays a
    fixture file; ``live`` reads the endpoint from the environment;
    ``live:<endpoint>`` overrides it.
    """
    if identity == "scripted":
        if not fixtures:
            raise UnknownBackendError("scripted (no fixtures path given)")
        return ScriptedBackend.from_file(fixtures)
    if identity.startswith("scripted:"):
        return ScriptedBackend.from_file(identity.split(":", 1)[1])
    if identity == "live":
        return HttpChatBackend.from_env()
    if identity.startswith("live:"):
        return HttpChatBackend(
            identity.split(":", 1)[1],
            model=os.environ.get("ECONAGENT_LLM_MODEL", "default"),
            api_key=os.environ.get("ECONAGENT_LLM_API_KEY", ""),
        )
    raise UnknownBackendError(identity)
