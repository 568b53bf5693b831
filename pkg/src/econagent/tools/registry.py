"""Tool registry: registration, ranking, argument validation, invocation."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Optional

from ..errors import (
    DuplicateNameError,
    EconAgentError,
    InvalidSchemaError,
    UnknownToolError,
)
from .descriptor import ToolDescriptor, ToolOutcome, summarize_tool
from .schema import validate_args

#: words carrying no information for lexical tool ranking
STOPWORDS = frozenset(
    "the a an to of on for with and or in by is are it its as at be".split()
)

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> frozenset[str]:
    return frozenset(_TOKEN.findall(text.lower())) - STOPWORDS


def lexical_score(task_text: str, scenario: str) -> float:
    """Jaccard overlap of content tokens, in [0, 1]."""
    a, b = tokenize(task_text), tokenize(scenario)
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def _version_key(version: str) -> tuple:
    parts = []
    for chunk in version.split("."):
        parts.append(int(chunk) if chunk.isdigit() else -1)
    return tuple(parts)


@dataclass(frozen=True)
class ToolRegistry:
    """Immutable name → descriptor mapping; registration returns a new one."""

    tools: dict[str, ToolDescriptor] = field(default_factory=dict)

    def names(self) -> list[str]:
        return sorted(self.tools)

    def __contains__(self, name: str) -> bool:
        return name in self.tools

    def __len__(self) -> int:
        return len(self.tools)

    def get(self, name: str) -> ToolDescriptor:
        if name not in self.tools:
            raise UnknownToolError(name)
        return self.tools[name]

    def descriptors(self) -> list[ToolDescriptor]:
        return [self.tools[n] for n in self.names()]


def register_tool(
    registry: ToolRegistry, descriptor: ToolDescriptor, backend=None
) -> ToolRegistry:
    """Add a tool, generating its summary from the manual when absent.

    Re-registration is allowed only at a strictly newer version.
    """
    existing = registry.tools.get(descriptor.name)
    if existing is not None and _version_key(descriptor.version) <= _version_key(
        existing.version
    ):
        raise DuplicateNameError(descriptor.name)
    if descriptor.handler is None:
        raise InvalidSchemaError(f"tool '{descriptor.name}' has no handler")
    if descriptor.summary is None:
        descriptor = descriptor.with_summary(summarize_tool(descriptor, backend))
    tools = dict(registry.tools)
    tools[descriptor.name] = descriptor
    return ToolRegistry(tools)


def rank_tools(
    registry: ToolRegistry, task_description: str, backend=None
) -> list[tuple[str, float]]:
    """Score every tool's target scenario against a task description.

    With a backend the model assigns scores in [0, 1]; any malformed reply
    falls back to the deterministic lexical overlap scorer, so ranking
    always succeeds offline.  Ordering is by descending score with ties
    broken by name.
    """
    if not registry.tools:
        raise ValueError("registry is empty")
    scores: Optional[dict[str, float]] = None
    if backend is not None:
        scores = _backend_scores(registry, task_description, backend)
    if scores is None:
        scores = {
            name: lexical_score(task_description, d.summary.target_scenario)
            for name, d in registry.tools.items()
        }
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(name, float(score)) for name, score in ranked]


def _backend_scores(registry, task_description, backend) -> Optional[dict[str, float]]:
    lines = [
        f"- {name}: {d.summary.target_scenario}" for name, d in sorted(registry.tools.items())
    ]
    prompt = (
        "Score how well each tool fits the task, 0 to 1. Reply with a JSON "
        "object mapping tool name to score, nothing else.\n"
        f"Task: {task_description}\nTools:\n" + "\n".join(lines)
    )
    try:
        reply = backend.complete([{"role": "user", "content": prompt}])
        text = reply.get("text", "") if isinstance(reply, dict) else str(reply)
        raw = json.loads(text)
        scores = {}
        for name in registry.tools:
            value = float(raw[name])
            if not 0.0 <= value <= 1.0:
                return None
            scores[name] = value
        return scores
    except Exception:
        return None


def invoke_tool(
    registry: ToolRegistry, name: str, args: dict, context: dict
) -> ToolOutcome:
    """Validate arguments and run a tool handler against the table store.

    Every failure inside the boundary — bad arguments, unknown table,
    estimation errors — is captured as an error outcome; only an unknown
    tool name raises.  ``context`` maps table names to DataTable values and
    is read-only during the call.
    """
    descriptor = registry.get(name)
    started = time.perf_counter()

    def finish(result=None, error: Optional[str] = None, echo: Optional[dict] = None):
        elapsed = int((time.perf_counter() - started) * 1000)
        if error is not None:
            return ToolOutcome("error", None, error, elapsed, echo or dict(args))
        return ToolOutcome("ok", result, None, elapsed, echo or dict(args))

    try:
        validated = validate_args(descriptor.parameters, args)
    except EconAgentError as exc:
        return finish(error=str(exc))
    try:
        result = descriptor.handler(context, validated)
    except Exception as exc:  # the boundary: structured outcome, never a crash
        return finish(error=f"{type(exc).__name__}: {exc}", echo=validated)
    return finish(result=result, echo=validated)
