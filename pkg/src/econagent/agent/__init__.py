from .backend import ChatBackend, HttpChatBackend, ScriptedBackend, resolve_backend
from .orchestrator import (
    classify_intent,
    execute_step,
    generate_plan,
    handle_followup,
    run_request,
    select_tool_for_step,
)
from .plan import Plan, PlanParseError, SubTask, detect_family, parse_plan_reply, template_plan
from .report import FailureSummary, FinalReport, export_result_json, report_from_result
from .session import Event, Session, SessionConfig, create_session

__all__ = [
    "ChatBackend",
    "Event",
    "FailureSummary",
    "FinalReport",
    "HttpChatBackend",
    "Plan",
    "PlanParseError",
    "ScriptedBackend",
    "Session",
    "SessionConfig",
    "SubTask",
    "classify_intent",
    "create_session",
    "detect_family",
    "execute_step",
    "export_result_json",
    "generate_plan",
    "handle_followup",
    "parse_plan_reply",
    "report_from_result",
    "resolve_backend",
    "run_request",
    "select_tool_for_step",
    "template_plan",
]
