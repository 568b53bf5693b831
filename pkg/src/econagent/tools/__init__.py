"""Function-calling tool registry for the workbench."""

from .builtins import builtin_descriptors, default_registry, get_table, load_manual
from .descriptor import (
    ToolDescriptor,
    ToolOutcome,
    ToolSummary,
    extract_summary,
    result_to_json,
    summarize_tool,
)
from .registry import (
    ToolRegistry,
    invoke_tool,
    lexical_score,
    rank_tools,
    register_tool,
    tokenize,
)
from .schema import Parameter, validate_args

__all__ = [
    "Parameter",
    "ToolDescriptor",
    "ToolOutcome",
    "ToolRegistry",
    "ToolSummary",
    "builtin_descriptors",
    "default_registry",
    "extract_summary",
    "get_table",
    "invoke_tool",
    "lexical_score",
    "load_manual",
    "rank_tools",
    "register_tool",
    "result_to_json",
    "summarize_tool",
    "tokenize",
    "validate_args",
]
