"""End-to-end request execution: planning, tool routing, reflection, reporting.

The control flow is deliberately rigid.  Data loading, exploratory analysis
and reporting are fixed routes with no model involvement; preprocessing,
estimation and diagnostics steps rank the registry against the step
description, then ask the backend only for the arguments of the winning
tool.  A failed invocation feeds the structured error message back and asks
again, up to the configured attempt budget.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional, Union

from ..errors import ArgsInvalidAfterRetriesError, EconAgentError, NoResultFoundError
from ..io import load_csv
from ..table import DataTable
from ..tools.descriptor import ToolDescriptor, ToolOutcome
from ..tools.registry import invoke_tool, rank_tools
from ..tools.schema import validate_args
from .plan import Plan, PlanParseError, SubTask, build_plan_prompt, detect_family
from .plan import parse_plan_reply, template_plan
from .report import FailureSummary, FinalReport, report_from_result
from .session import Session

#: prompt markers scripted fixtures key their expectations on
ARGS_MARKER = "Provide arguments"
CLASSIFY_MARKER = "Classify the follow-up"
REVISE_MARKER = "Revise the plan"

#: actions routed through ranking + backend argument generation
RANKED_ACTIONS = ("data_preprocessing", "estimation", "diagnostics")

_DATA_PATH = re.compile(r"[\w./\\~-]+\.(?:csv|dta)\b", re.IGNORECASE)

RunResult = Union[FinalReport, FailureSummary]


# ---------------------------------------------------------------------------
# prompt assembly
# ---------------------------------------------------------------------------


def _tool_summaries_text(session: Session) -> str:
    lines = []
    for d in session.registry.descriptors():
        scenario = d.summary.target_scenario if d.summary else ""
        lines.append(f"- {d.name}: {scenario}")
    return "\n".join(lines)


def _table_schemas_text(session: Session) -> str:
    if not session.tables:
        return "(no tables loaded)"
    lines = []
    for name in sorted(session.tables):
        table = session.tables[name]
        cols = ", ".join(f"{c.name} ({c.kind})" for c in table.columns)
        lines.append(f"- {name} [{table.n_rows} rows]: {cols}")
    return "\n".join(lines)


def _args_prompt(session: Session, subtask: SubTask, descriptor: ToolDescriptor) -> str:
    params = json.dumps([p.to_json_obj() for p in descriptor.parameters], indent=2)
    return (
        f"{ARGS_MARKER} for the tool '{descriptor.name}'.\n\n"
        f"Step: {subtask.description}\n"
        f"Analysis request: {session.request_text}\n\n"
        f"Loaded tables:\n{_table_schemas_text(session)}\n\n"
        f"Tool parameters:\n{params}\n\n"
        "Reply with a tool call, or with a single JSON object of arguments."
    )


def _parse_args_reply(reply: dict) -> dict:
    """Pull an argument object out of either reply shape."""
    if "tool_call" in reply:
        args = reply["tool_call"].get("args", {})
        if not isinstance(args, dict):
            raise ValueError("tool call arguments must be a JSON object")
        return dict(args)
    text = str(reply.get("text", "")).strip()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"reply was not a JSON object of arguments: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("reply was not a JSON object of arguments")
    return obj


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------


def generate_plan(session: Session, user_request: str) -> Plan:
    """Ask the backend for a plan; fall back to the family template.

    One retry with the parse error appended, then the deterministic
    template, so planning never fails outright.  Falling back leaves a
    PlanParseWarning note on the plan.
    """
    family = detect_family(user_request)
    messages = build_plan_prompt(user_request, _tool_summaries_text(session), family)
    plan: Optional[Plan] = None
    failure = ""
    for _ in range(2):
        try:
            reply = session.backend.complete(messages)
        except Exception as exc:  # unscripted or unreachable backend
            failure = f"{type(exc).__name__}: {exc}"
            break
        text = str(reply.get("text", ""))
        session.record("assistant", text)
        try:
            plan = parse_plan_reply(text, family, user_request)
            break
        except PlanParseError as exc:
            failure = str(exc)
            messages.append({"role": "assistant", "content": text})
            messages.append(
                {
                    "role": "user",
                    "content": f"That plan was invalid ({exc}). "
                    "Reply again with the corrected JSON array only.",
                }
            )
    if plan is None:
        plan = template_plan(family, user_request)
        plan.notes.append(f"PlanParseWarning: used the {family} template ({failure})")
    session.plan = plan
    session.emit("plan", plan.to_json_obj())
    return plan


# ---------------------------------------------------------------------------
# fixed routes
# ---------------------------------------------------------------------------


def _resolve_data_path(session: Session, subtask: SubTask) -> Optional[Path]:
    """Find a loadable CSV mentioned by the request or the step description."""
    data_dir = Path(session.config.data_dir) if session.config.data_dir else None
    for text in (subtask.description, session.request_text):
        for raw in _DATA_PATH.findall(text):
            path = Path(raw).expanduser()
            candidates = [path]
            if path.suffix.lower() == ".dta":
                candidates = [path.with_suffix(".csv")]
            if data_dir is not None:
                candidates.append(data_dir / path.with_suffix(".csv").name)
            for candidate in candidates:
                if candidate.suffix.lower() == ".csv" and candidate.is_file():
                    return candidate
    return None


def _run_loading(session: Session, subtask: SubTask) -> ToolOutcome:
    path = _resolve_data_path(session, subtask)
    if path is None:
        if session.active_table is not None:
            table = session.get_table()
            return ToolOutcome(
                "ok", table, None, 0, {"table": table.name, "note": "already loaded"}
            )
        return ToolOutcome(
            "error",
            None,
            "no dataset path found in the request and no table is loaded",
            0,
            {},
        )
    table = load_csv(path)
    name = session.put_table(table)
    return ToolOutcome("ok", table, None, 0, {"path": str(path), "table": name})


def _run_reporting(session: Session, subtask: SubTask) -> ToolOutcome:
    plan = session.plan
    source: Optional[SubTask] = None
    if plan is not None:
        for step in plan.subtasks:
            if step.action in ("estimation", "diagnostics") and step.status == "done":
                if step.outcome is not None and step.outcome.ok:
                    source = step
    if source is None or source.outcome is None:
        raise NoResultFoundError("no completed estimation step to report from")
    report = report_from_result(
        source.outcome.result,
        echo_args=source.args or {},
        lag_indexing=session.config.lag_indexing,
    )
    session.report = report
    session.add_artifact("result.json", report.json_text + "\n", "application/json")
    session.emit("report", {"json_text": report.json_text, "method": report.method})
    return ToolOutcome("ok", report, None, 0, {"from_step": source.id})


# ---------------------------------------------------------------------------
# ranked tool execution
# ---------------------------------------------------------------------------


def select_tool_for_step(session: Session, subtask: SubTask) -> tuple[str, dict]:
    """Rank tools for a step, then get schema-valid arguments for the winner.

    A validation failure is sent back to the backend and counts against the
    attempt budget; exhausting it raises ArgsInvalidAfterRetries.
    """
    if subtask.action not in RANKED_ACTIONS:
        raise ValueError(f"step action '{subtask.action}' uses a fixed route")
    name = rank_tools(session.registry, subtask.description)[0][0]
    descriptor = session.registry.get(name)
    messages = [{"role": "user", "content": _args_prompt(session, subtask, descriptor)}]
    last = ""
    for _ in range(session.config.max_retries):
        reply = session.backend.complete(messages, tool_schemas=[descriptor])
        try:
            args = _parse_args_reply(reply)
            return name, validate_args(descriptor.parameters, args)
        except (ValueError, EconAgentError) as exc:
            last = str(exc)
            messages.append({"role": "assistant", "content": json.dumps(reply)})
            messages.append(
                {"role": "user", "content": f"Those arguments were invalid: {exc}. Try again."}
            )
    raise ArgsInvalidAfterRetriesError(name, session.config.max_retries, last)


def _run_ranked(session: Session, subtask: SubTask) -> ToolOutcome:
    """The reflection loop: ask for args, invoke, feed errors back, repeat."""
    name = rank_tools(session.registry, subtask.description)[0][0]
    descriptor = session.registry.get(name)
    subtask.selected_tool = name
    messages = [{"role": "user", "content": _args_prompt(session, subtask, descriptor)}]
    outcome = ToolOutcome("error", None, "step was never attempted", 0, {})
    while subtask.attempts < session.config.max_retries:
        subtask.attempts += 1
        try:
            reply = session.backend.complete(messages, tool_schemas=[descriptor])
            args = _parse_args_reply(reply)
        except Exception as exc:
            outcome = ToolOutcome("error", None, f"{type(exc).__name__}: {exc}", 0, {})
            session.record("tool", json.dumps(outcome.to_json_obj()))
            session.emit(
                "step_attempt",
                {"id": subtask.id, "attempt": subtask.attempts, "error": outcome.error_message},
            )
            messages.append(
                {"role": "user", "content": f"The previous attempt failed: {outcome.error_message}. Provide corrected arguments."}
            )
            continue
        session.record("assistant", json.dumps({"tool": name, "args": args}))
        outcome = invoke_tool(session.registry, name, args, session.tables)
        session.record("tool", json.dumps(outcome.to_json_obj()))
        session.emit(
            "step_attempt",
            {
                "id": subtask.id,
                "attempt": subtask.attempts,
                "ok": outcome.ok,
                "error": outcome.error_message,
            },
        )
        if outcome.ok:
            if isinstance(outcome.result, DataTable):
                session.put_table(outcome.result)
            return outcome
        messages.append({"role": "assistant", "content": json.dumps({"tool": name, "args": args})})
        messages.append(
            {
                "role": "user",
                "content": f"The tool call failed: {outcome.error_message}. Provide corrected arguments.",
            }
        )
    return outcome


# ---------------------------------------------------------------------------
# step and plan execution
# ---------------------------------------------------------------------------


def execute_step(session: Session, subtask: SubTask) -> SubTask:
    """Run one subtask to a terminal status; errors never escape."""
    plan = session.plan
    if plan is not None:
        for dep in subtask.depends_on:
            if plan.step(dep).status != "done":
                raise ValueError(f"step {subtask.id} depends on unfinished step {dep}")
    subtask.status = "running"
    session.emit("step_started", {"id": subtask.id, "action": subtask.action})
    try:
        if subtask.action == "data_loading":
            subtask.attempts = 1
            outcome = _run_loading(session, subtask)
            subtask.selected_tool = "load_csv"
        elif subtask.action == "exploratory_analysis":
            subtask.attempts = 1
            subtask.selected_tool = "describe"
            if session.active_table is None:
                outcome = ToolOutcome("error", None, "no table loaded to describe", 0, {})
            else:
                outcome = invoke_tool(
                    session.registry, "describe", {"table": session.active_table}, session.tables
                )
        elif subtask.action == "reporting":
            subtask.attempts = 1
            outcome = _run_reporting(session, subtask)
        else:
            outcome = _run_ranked(session, subtask)
        if subtask.action not in RANKED_ACTIONS:
            session.record("tool", json.dumps(outcome.to_json_obj()))
    except Exception as exc:  # the boundary: a failed step, never a crash
        outcome = ToolOutcome("error", None, f"{type(exc).__name__}: {exc}", 0, {})
        if subtask.attempts == 0:
            subtask.attempts = 1
        session.record("tool", json.dumps(outcome.to_json_obj()))
    subtask.outcome = outcome
    subtask.args = dict(outcome.echo_args) if outcome.echo_args else subtask.args
    subtask.status = "done" if outcome.ok else "failed"
    session.emit(
        "step_finished",
        {"id": subtask.id, "status": subtask.status, "attempts": subtask.attempts},
    )
    return subtask


def _archived_errors(session: Session, subtask: SubTask) -> tuple[str, ...]:
    """Error messages from the failed step's attempts, oldest first.

    Each attempt archives exactly one tool turn, so the failing step's
    errors are the trailing ``attempts`` tool entries of the history.
    """
    tool_turns = [t for t in session.history if t["role"] == "tool"]
    errors = []
    for turn in tool_turns[-max(subtask.attempts, 1):]:
        try:
            obj = json.loads(turn["content"])
        except json.JSONDecodeError:
            continue
        if obj.get("status") == "error":
            errors.append(str(obj.get("error_message")))
    if not errors and subtask.outcome is not None and subtask.outcome.error_message:
        errors.append(str(subtask.outcome.error_message))
    return tuple(errors)


def _execute_plan(session: Session) -> RunResult:
    plan = session.plan
    if plan is None:
        raise ValueError("session has no plan to execute")
    for subtask in plan.subtasks:
        if subtask.status == "done":
            continue
        execute_step(session, subtask)
        if subtask.status == "failed":
            failure = FailureSummary(
                subtask.id, subtask.description, _archived_errors(session, subtask)
            )
            session.emit(
                "failure", {"id": failure.subtask_id, "errors": list(failure.errors)}
            )
            return failure
    if session.report is None:
        failure = FailureSummary(
            plan.reporting_step().id, plan.reporting_step().description, ("no report produced",)
        )
        return failure
    return session.report


def run_request(session: Session, user_request: str) -> RunResult:
    """Plan and execute a request end to end; always returns, never raises."""
    session.status = "running"
    session.request_text = user_request
    session.report = None
    session.record("user", user_request)
    try:
        generate_plan(session, user_request)
        result = _execute_plan(session)
    except Exception as exc:  # absolute boundary
        step_id = 0
        if session.plan is not None and session.plan.subtasks:
            step_id = session.plan.subtasks[0].id
            for s in session.plan.subtasks:
                if s.status in ("running", "failed"):
                    step_id = s.id
                    break
        result = FailureSummary(step_id, "request execution", (f"{type(exc).__name__}: {exc}",))
    session.status = "idle"
    return result


# ---------------------------------------------------------------------------
# follow-up handling
# ---------------------------------------------------------------------------


def classify_intent(session: Session, message: str) -> str:
    """Route a follow-up to {continue_refine, new_task}; total, never raises."""
    prompt = (
        f"{CLASSIFY_MARKER} from the user. Reply with exactly one word, "
        "either continue_refine (it adjusts the ongoing analysis) or "
        "new_task (it starts an unrelated analysis).\n\n"
        f"Ongoing request: {session.request_text}\n"
        f"Follow-up: {message}"
    )
    try:
        reply = session.backend.complete([{"role": "user", "content": prompt}])
        text = str(reply.get("text", "")).strip().lower()
        if text in ("continue_refine", "new_task"):
            return text
    except Exception:
        pass
    low = message.lower()
    if "new analysis" in low or _DATA_PATH.search(message):
        return "new_task"
    return "continue_refine"


def _revise_plan(session: Session, message: str) -> None:
    """Reset or extend plan steps per the backend; fallback resets estimation on."""
    plan = session.plan
    assert plan is not None
    prompt = (
        f"{REVISE_MARKER} for this follow-up. The current plan is:\n"
        f"{json.dumps(plan.to_json_obj(), indent=2)}\n\n"
        f"Follow-up: {message}\n\n"
        'Reply with a JSON object {"reset": [step ids to redo], "add": '
        '[{"description": str, "action": str}]} and nothing else.'
    )
    reset_ids: Optional[list[int]] = None
    additions: list[dict] = []
    try:
        reply = session.backend.complete([{"role": "user", "content": prompt}])
        obj = json.loads(str(reply.get("text", "")))
        raw_reset = obj.get("reset", [])
        raw_add = obj.get("add", [])
        if isinstance(raw_reset, list) and all(isinstance(i, int) for i in raw_reset):
            known = {s.id for s in plan.subtasks}
            if all(i in known for i in raw_reset):
                reset_ids = raw_reset
        if isinstance(raw_add, list):
            additions = [a for a in raw_add if isinstance(a, dict)]
        if reset_ids is None:
            additions = []
    except Exception:
        reset_ids = None
        additions = []
    if reset_ids is None:
        reset_ids = [
            s.id for s in plan.subtasks if s.action in ("estimation", "diagnostics", "reporting")
        ]
        plan.notes.append("follow-up fallback: re-running estimation and reporting")
    for step_id in reset_ids:
        step = plan.step(step_id)
        step.status = "pending"
        step.attempts = 0
        step.outcome = None
        step.args = None
        step.selected_tool = None
    reporting = plan.reporting_step()
    for item in additions:
        action = item.get("action")
        description = item.get("description", "")
        if action not in ("data_preprocessing", "estimation", "diagnostics") or not description:
            continue
        new_id = max(s.id for s in plan.subtasks) + 1
        previous = plan.subtasks[-2].id if len(plan.subtasks) > 1 else reporting.id
        plan.subtasks.insert(
            len(plan.subtasks) - 1,
            SubTask(new_id, str(description), action, depends_on=[previous]),
        )
        reporting.depends_on = [new_id]
    if reset_ids or additions:
        reporting.status = "pending"
        reporting.outcome = None
        reporting.attempts = 0
    session.emit("plan_revised", plan.to_json_obj())


def handle_followup(session: Session, message: str, intent: Optional[str] = None) -> RunResult:
    """Apply a follow-up: refine the existing plan or start a new task."""
    if intent is None:
        intent = classify_intent(session, message)
    session.record("user", message)
    if intent == "new_task":
        session.tables.clear()
        session.active_table = None
        session.plan = None
        session.report = None
        return run_request(session, message)
    if session.plan is None:
        return run_request(session, message)
    session.status = "running"
    session.request_text = f"{session.request_text}\nFollow-up: {message}"
    try:
        _revise_plan(session, message)
        result = _execute_plan(session)
    except Exception as exc:
        result = FailureSummary(
            session.plan.reporting_step().id,
            "follow-up execution",
            (f"{type(exc).__name__}: {exc}",),
        )
    session.status = "idle"
    return result
