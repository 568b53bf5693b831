from .extract import extract_result
from .metrics import (
    MetricReport,
    aggregate_metrics,
    classify_replication,
    relative_error,
    significance_level,
)
from .prompts import build_prompt
from .reporting import render_report
from .runners import AgentRunner, RunRecord, SubprocessRunner, run_suite
from .tasks import Expected, TaskSpec, load_tasks, method_label

__all__ = [
    "AgentRunner",
    "Expected",
    "MetricReport",
    "RunRecord",
    "SubprocessRunner",
    "TaskSpec",
    "aggregate_metrics",
    "build_prompt",
    "classify_replication",
    "extract_result",
    "load_tasks",
    "method_label",
    "relative_error",
    "render_report",
    "run_suite",
    "significance_level",
]
