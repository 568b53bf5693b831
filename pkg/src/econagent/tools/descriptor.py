"""Tool descriptors: the per-tool manual, summary, schema and handler."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..errors import InvalidSchemaError, MalformedSummaryError
from ..results import FitResult
from ..summary import TableSummary
from ..table import DataTable
from .schema import Parameter

#: the four labeled sections a tool manual must provide, in order
SUMMARY_SECTIONS = (
    ("target_scenario", "Target scenario"),
    ("input_requirements", "Input requirements"),
    ("output_structure", "Output structure"),
    ("special_requirements", "Special requirements"),
)


@dataclass(frozen=True)
class ToolSummary:
    """Four-aspect digest of a tool manual used for ranking and display."""

    target_scenario: str
    input_requirements: str
    output_structure: str
    special_requirements: str

    def __post_init__(self) -> None:
        for key, _ in SUMMARY_SECTIONS:
            if not getattr(self, key).strip():
                raise MalformedSummaryError(f"summary field '{key}' is empty")

    def to_json_obj(self) -> dict:
        return {key: getattr(self, key) for key, _ in SUMMARY_SECTIONS}

    @staticmethod
    def from_json_obj(obj: dict) -> "ToolSummary":
        missing = [key for key, _ in SUMMARY_SECTIONS if not str(obj.get(key, "")).strip()]
        if missing:
            raise MalformedSummaryError(f"missing or empty summary fields: {missing}")
        return ToolSummary(**{key: str(obj[key]) for key, _ in SUMMARY_SECTIONS})


#: handler contract: (named-table store, validated args) -> result object
Handler = Callable[[dict, dict], Any]


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    internal_prompt: str
    parameters: tuple[Parameter, ...]
    handler: Optional[Handler] = None
    summary: Optional[ToolSummary] = None
    version: str = "1.0"

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidSchemaError("tool name must be nonempty")
        seen = set()
        for p in self.parameters:
            if p.name in seen:
                raise InvalidSchemaError(f"duplicate parameter '{p.name}'")
            seen.add(p.name)

    def with_summary(self, summary: ToolSummary) -> "ToolDescriptor":
        return ToolDescriptor(
            self.name, self.internal_prompt, self.parameters, self.handler, summary, self.version
        )

    # -- serialization (handler excluded by design) --------------------------

    def to_json_obj(self) -> dict:
        if self.summary is None:
            raise InvalidSchemaError(f"tool '{self.name}' has no summary to serialize")
        return {
            "name": self.name,
            "version": self.version,
            "internal_prompt": self.internal_prompt,
            "summary": self.summary.to_json_obj(),
            "parameters": [p.to_json_obj() for p in self.parameters],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def from_json_obj(obj: dict) -> "ToolDescriptor":
        return ToolDescriptor(
            name=obj["name"],
            internal_prompt=obj["internal_prompt"],
            parameters=tuple(Parameter.from_json_obj(p) for p in obj.get("parameters", [])),
            handler=None,
            summary=ToolSummary.from_json_obj(obj["summary"]),
            version=obj.get("version", "1.0"),
        )

    @staticmethod
    def from_json_text(text: str) -> "ToolDescriptor":
        return ToolDescriptor.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class ToolOutcome:
    """What one tool invocation produced: a result or a structured error."""

    status: str
    result: Any = None
    error_message: Optional[str] = None
    elapsed_ms: int = 0
    echo_args: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in ("ok", "error"):
            raise ValueError(f"unknown outcome status '{self.status}'")
        if (self.result is None) == (self.error_message is None):
            raise ValueError("exactly one of result / error_message must be set")

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json_obj(self, include_timing: bool = False) -> dict:
        """Deterministic serialization; wall-clock timing only on request."""
        obj: dict = {"status": self.status, "echo_args": self.echo_args}
        if self.status == "ok":
            obj["result"] = result_to_json(self.result)
        else:
            obj["error_message"] = self.error_message
        if include_timing:
            obj["elapsed_ms"] = self.elapsed_ms
        return obj


def result_to_json(result: Any) -> Any:
    """JSON projection of any tool result object."""
    if result is None:
        return None
    if isinstance(result, (FitResult, TableSummary)):
        return result.to_json_obj()
    if isinstance(result, DataTable):
        return {
            "table": result.name,
            "n_rows": result.n_rows,
            "columns": [{"name": c.name, "kind": c.kind} for c in result.columns],
            "notes": list(result.notes),
        }
    if hasattr(result, "__dataclass_fields__"):
        out = {}
        for key in result.__dataclass_fields__:
            out[key] = result_to_json(getattr(result, key))
        return out
    if isinstance(result, (list, tuple)):
        return [result_to_json(v) for v in result]
    if isinstance(result, dict):
        return {str(k): result_to_json(v) for k, v in result.items()}
    return result


# ---------------------------------------------------------------------------
# summary generation
# ---------------------------------------------------------------------------

_HEADING = re.compile(r"^##\s+(.+?)\s*$", re.MULTILINE)


def extract_summary(internal_prompt: str) -> ToolSummary:
    """Deterministic four-aspect extraction from a labeled tool manual.

    The manual must contain the markdown sections "## Target scenario",
    "## Input requirements", "## Output structure" and
    "## Special requirements"; each section's body becomes one summary
    field.
    """
    sections: dict[str, str] = {}
    matches = list(_HEADING.finditer(internal_prompt))
    for i, m in enumerate(matches):
        title = m.group(1).strip().lower()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(internal_prompt)
        sections[title] = internal_prompt[m.end():end].strip()
    fields = {}
    for key, heading in SUMMARY_SECTIONS:
        body = sections.get(heading.lower(), "")
        if not body:
            raise MalformedSummaryError(f"manual section '{heading}' missing or empty")
        fields[key] = " ".join(body.split())
    return ToolSummary(**fields)


_SUMMARY_INSTRUCTION = (
    "Summarize the tool manual below into a JSON object with exactly these "
    "string keys: target_scenario, input_requirements, output_structure, "
    "special_requirements. Every value must be a nonempty sentence or short "
    "paragraph; use \"none\" when a section has nothing to say. Reply with "
    "the JSON object only.\n\n"
)


def summarize_tool(descriptor: ToolDescriptor, backend=None) -> ToolSummary:
    """Produce the four-aspect summary for a tool.

    With a chat backend the summary is model-written and then validated,
    retrying once with the validation error appended; without one, the
    deterministic section extraction is used.
    """
    if not descriptor.internal_prompt.strip():
        raise MalformedSummaryError("internal prompt is empty")
    if backend is None:
        return extract_summary(descriptor.internal_prompt)

    messages = [
        {"role": "system", "content": "You write terse, accurate tool summaries."},
        {"role": "user", "content": _SUMMARY_INSTRUCTION + descriptor.internal_prompt},
    ]
    last_error = ""
    for _ in range(2):
        reply = backend.complete(messages)
        text = reply.get("text", "") if isinstance(reply, dict) else str(reply)
        try:
            return ToolSummary.from_json_obj(json.loads(text))
        except (json.JSONDecodeError, MalformedSummaryError, TypeError) as exc:
            last_error = str(exc)
            messages.append({"role": "assistant", "content": text})
            messages.append(
                {"role": "user", "content": f"That reply was invalid ({last_error}). Try again."}
            )
    raise MalformedSummaryError(f"backend summary invalid after retry: {last_error}")
