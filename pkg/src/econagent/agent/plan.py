"""Plan generation: request decomposition into typed, ordered subtasks."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional

ACTIONS = (
    "data_loading",
    "data_preprocessing",
    "exploratory_analysis",
    "estimation",
    "diagnostics",
    "reporting",
)

FAMILIES = ("propensity", "iv", "did", "rdd", "regression")


@dataclass
class SubTask:
    id: int
    description: str
    action: str
    econometric_tag: Optional[str] = None
    depends_on: list[int] = field(default_factory=list)
    status: str = "pending"
    selected_tool: Optional[str] = None
    args: Optional[dict] = None
    outcome: Optional[object] = None
    attempts: int = 0

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "action": self.action,
            "econometric_tag": self.econometric_tag,
            "depends_on": list(self.depends_on),
            "status": self.status,
            "selected_tool": self.selected_tool,
            "attempts": self.attempts,
        }


@dataclass
class Plan:
    subtasks: list[SubTask]
    template_name: str
    created_from: str
    notes: list[str] = field(default_factory=list)

    def reporting_step(self) -> SubTask:
        return self.subtasks[-1]

    def step(self, step_id: int) -> SubTask:
        for s in self.subtasks:
            if s.id == step_id:
                return s
        raise KeyError(step_id)

    def to_json_obj(self) -> dict:
        return {
            "template_name": self.template_name,
            "created_from": self.created_from,
            "subtasks": [s.to_json_obj() for s in self.subtasks],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# method-family detection and templates
# ---------------------------------------------------------------------------

_FAMILY_PATTERNS = (
    ("propensity", r"propensity|\bmatching\b"),
    ("iv", r"instrument|two[- ]stage|\b2sls\b|\biv\b"),
    ("did", r"difference[- ]in[- ]difference|\bdid\b|event[- ]study|parallel trend"),
    ("rdd", r"discontinuity|\brdd\b|running variable"),
)


def detect_family(request: str) -> str:
    """Keyword routing to a plan template family; regression is the default."""
    low = request.lower()
    for family, pattern in _FAMILY_PATTERNS:
        if re.search(pattern, low):
            return family
    return "regression"


@lru_cache(maxsize=None)
def load_template(family: str) -> dict:
    text = (resources.files(__package__) / "templates" / f"{family}.json").read_text(
        encoding="utf-8"
    )
    return json.loads(text)


def template_plan(family: str, request: str) -> Plan:
    """The deterministic five-step plan for a method family."""
    template = load_template(family)
    subtasks = []
    for i, step in enumerate(template["steps"], start=1):
        subtasks.append(
            SubTask(
                id=i,
                description=step["description"],
                action=step["action"],
                econometric_tag=step.get("econometric_tag"),
                depends_on=[i - 1] if i > 1 else [],
            )
        )
    return Plan(subtasks, template_name=family, created_from=request)


# ---------------------------------------------------------------------------
# backend-driven planning
# ---------------------------------------------------------------------------

PLAN_MARKER = "Decompose the request"

_PLAN_SYSTEM = (
    "You are an econometrics analysis planner. You decompose a user request "
    "into ordered subtasks and reply with a JSON array only. Each element is "
    '{"description": str, "action": str, "econometric_tag": optional str, '
    '"depends_on": optional list of earlier 1-based step numbers}. Allowed '
    "actions: data_loading, data_preprocessing, exploratory_analysis, "
    "estimation, diagnostics, reporting. Keep the plan minimal and end with "
    "at most one reporting step."
)


def build_plan_prompt(request: str, tool_summaries: str, family: str) -> list[dict]:
    template = load_template(family)
    reference = "\n".join(
        f"  {i}. [{s['action']}] {s['description']}"
        for i, s in enumerate(template["steps"], start=1)
    )
    user = (
        f"{PLAN_MARKER} into subtasks.\n\nRequest:\n{request}\n\n"
        f"Available tools:\n{tool_summaries}\n\n"
        f"Reference template ({family}):\n{reference}\n\n"
        "Reply with the JSON array of subtasks only."
    )
    return [
        {"role": "system", "content": _PLAN_SYSTEM},
        {"role": "user", "content": user},
    ]


class PlanParseError(ValueError):
    pass


def parse_plan_reply(text: str, family: str, request: str) -> Plan:
    """Validate a model plan reply; raises PlanParseError on any defect.

    A reply without a reporting step is legal: the template's reporting
    step is appended so the effect extraction always runs last.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"not valid JSON: {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise PlanParseError("plan must be a nonempty JSON array")
    subtasks: list[SubTask] = []
    for i, item in enumerate(raw, start=1):
        if not isinstance(item, dict):
            raise PlanParseError(f"step {i} is not an object")
        description = item.get("description")
        action = item.get("action")
        if not description or not isinstance(description, str):
            raise PlanParseError(f"step {i} has no description")
        if action not in ACTIONS:
            raise PlanParseError(f"step {i} has unknown action {action!r}")
        deps = item.get("depends_on", [i - 1] if i > 1 else [])
        if not isinstance(deps, list) or any(
            not isinstance(dep, int) or dep < 1 or dep >= i for dep in deps
        ):
            raise PlanParseError(f"step {i} depends_on must reference earlier steps")
        tag = item.get("econometric_tag")
        if tag is not None and not isinstance(tag, str):
            raise PlanParseError(f"step {i} econometric_tag must be text")
        subtasks.append(SubTask(i, description, action, tag, list(deps)))

    reporting = [s for s in subtasks if s.action == "reporting"]
    if len(reporting) > 1:
        raise PlanParseError("more than one reporting step")
    if reporting and subtasks[-1].action != "reporting":
        raise PlanParseError("reporting step must come last")
    if not reporting:
        template = load_template(family)
        tail = template["steps"][-1]
        subtasks.append(
            SubTask(
                id=len(subtasks) + 1,
                description=tail["description"],
                action="reporting",
                depends_on=[len(subtasks)],
            )
        )
    return Plan(subtasks, template_name=family, created_from=request)
