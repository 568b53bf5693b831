"""Tool schema validation, registry behavior, and the invocation boundary."""

from __future__ import annotations

import json

import pytest

from econagent.errors import (
    DuplicateNameError,
    InvalidSchemaError,
    KindMismatchError,
    MalformedSummaryError,
    MissingRequiredError,
    UnknownKeyError,
    UnknownToolError,
)
from econagent.tools import (
    Parameter,
    ToolDescriptor,
    ToolOutcome,
    ToolRegistry,
    ToolSummary,
    default_registry,
    extract_summary,
    invoke_tool,
    lexical_score,
    rank_tools,
    register_tool,
    summarize_tool,
    validate_args,
)

from conftest import build_table


class QueueBackend:
    """Replies from a fixed queue; raises when the queue runs dry."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        if not self.replies:
            raise RuntimeError("queue exhausted")
        return {"text": self.replies.pop(0)}


_MANUAL = """# frobnicator

## Target scenario
Estimates the average effect of a binary treatment.

## Input requirements
A loaded table with outcome and
treatment columns.

## Output structure
A fit result with one row per coefficient.

## Special requirements
none
"""


def _desc(name="frobnicator", version="1.0", handler=lambda store, a: a):
    return ToolDescriptor(
        name=name,
        internal_prompt=_MANUAL,
        parameters=(
            Parameter("table", "string", required=True),
            Parameter("alpha", "number", default=0.05),
            Parameter("columns", "array", default=None),
            Parameter("mode", "enum", values=("fast", "exact"), default="fast"),
            Parameter("iterations", "integer", default=10),
            Parameter("verbose", "boolean", default=False),
        ),
        handler=handler,
        version=version,
    )


# ---------------------------------------------------------------------------
# parameter schema
# ---------------------------------------------------------------------------


def test_unknown_keys_rejected_first_in_sorted_order():
    params = _desc().parameters
    with pytest.raises(UnknownKeyError) as err:
        validate_args(params, {"zeta": 1, "beta_split": 0.8, "table": "t"})
    # both keys are unknown; the alphabetically first one is named
    assert "beta_split" in str(err.value)


def test_missing_required_rejected():
    params = _desc().parameters
    with pytest.raises(MissingRequiredError):
        validate_args(params, {"alpha": 0.1})
    with pytest.raises(MissingRequiredError):
        validate_args(params, {"table": None})


def test_defaults_fill_absent_parameters():
    params = _desc().parameters
    out = validate_args(params, {"table": "t"})
    assert out == {
        "table": "t",
        "alpha": 0.05,
        "columns": None,
        "mode": "fast",
        "iterations": 10,
        "verbose": False,
    }


def test_lossless_coercions_only():
    params = _desc().parameters
    out = validate_args(params, {"table": "t", "alpha": 1, "iterations": 3.0})
    assert out["alpha"] == 1.0 and isinstance(out["alpha"], float)
    assert out["iterations"] == 3 and isinstance(out["iterations"], int)
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": "t", "iterations": 3.5})
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": "t", "alpha": "0.05"})
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": 7})


def test_booleans_are_not_integers():
    params = _desc().parameters
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": "t", "iterations": True})
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": "t", "verbose": 1})


def test_enum_values_enforced():
    params = _desc().parameters
    assert validate_args(params, {"table": "t", "mode": "exact"})["mode"] == "exact"
    with pytest.raises(KindMismatchError):
        validate_args(params, {"table": "t", "mode": "sloppy"})


def test_schema_construction_guards():
    with pytest.raises(InvalidSchemaError):
        Parameter("p", "tensor")
    with pytest.raises(InvalidSchemaError):
        Parameter("p", "enum")
    with pytest.raises(InvalidSchemaError):
        Parameter("p", "string", values=("a",))
    with pytest.raises(InvalidSchemaError):
        Parameter("p", "string", required=True, default="x")
    with pytest.raises(InvalidSchemaError):
        ToolDescriptor(
            "dup",
            _MANUAL,
            (Parameter("a", "string"), Parameter("a", "number")),
        )


# ---------------------------------------------------------------------------
# summaries and serialization
# ---------------------------------------------------------------------------


def test_extract_summary_reads_labeled_sections():
    s = extract_summary(_MANUAL)
    assert s.target_scenario == "Estimates the average effect of a binary treatment."
    assert s.input_requirements == "A loaded table with outcome and treatment columns."
    assert s.special_requirements == "none"


def test_extract_summary_missing_section_raises():
    with pytest.raises(MalformedSummaryError):
        extract_summary("## Target scenario\nsomething\n")


def test_summarize_tool_retries_once_on_bad_reply():
    good = json.dumps(
        {
            "target_scenario": "scores treatments",
            "input_requirements": "a table",
            "output_structure": "a fit",
            "special_requirements": "none",
        }
    )
    backend = QueueBackend(["this is not json", good])
    summary = summarize_tool(_desc(), backend)
    assert backend.calls == 2
    assert summary.target_scenario == "scores treatments"
    with pytest.raises(MalformedSummaryError):
        summarize_tool(_desc(), QueueBackend(["nope", "{}"]))


def test_descriptor_json_round_trip_is_byte_exact():
    desc = _desc().with_summary(extract_summary(_MANUAL))
    text = desc.to_json_text()
    again = ToolDescriptor.from_json_text(text)
    assert again.to_json_text() == text
    assert again.handler is None


def test_all_builtin_descriptors_serialize_and_round_trip():
    for desc in default_registry().descriptors():
        text = desc.to_json_text()
        again = ToolDescriptor.from_json_text(text)
        assert again.to_json_text() == text


# ---------------------------------------------------------------------------
# registration and ranking
# ---------------------------------------------------------------------------


def test_register_requires_strictly_newer_version():
    reg = register_tool(ToolRegistry(), _desc())
    assert "frobnicator" in reg
    with pytest.raises(DuplicateNameError):
        register_tool(reg, _desc())
    with pytest.raises(DuplicateNameError):
        register_tool(reg, _desc(version="0.9"))
    reg2 = register_tool(reg, _desc(version="1.1"))
    assert reg2.get("frobnicator").version == "1.1"
    # the original mapping is untouched
    assert reg.get("frobnicator").version == "1.0"


def test_register_rejects_missing_handler():
    with pytest.raises(InvalidSchemaError):
        register_tool(ToolRegistry(), _desc(handler=None))


def test_lexical_ranking_prefers_overlapping_scenario():
    ranked = rank_tools(
        default_registry(),
        "run an event study around the staggered adoption of a policy",
    )
    names = [name for name, _ in ranked]
    assert names[0] == "did_event_study"
    assert all(0.0 <= score <= 1.0 for _, score in ranked)
    scores = [score for _, score in ranked]
    assert scores == sorted(scores, reverse=True)


def test_lexical_score_bounds():
    assert lexical_score("", "anything") == 0.0
    assert lexical_score("match these words", "match these words") == 1.0


def test_backend_scores_used_when_well_formed():
    reg = default_registry()
    raw = {name: 0.1 for name in reg.names()}
    raw["rdd_sharp"] = 0.99
    ranked = rank_tools(reg, "whatever", QueueBackend([json.dumps(raw)]))
    assert ranked[0] == ("rdd_sharp", 0.99)


def test_backend_garbage_falls_back_to_lexical():
    reg = default_registry()
    ranked_fallback = rank_tools(reg, "instrument for an endogenous regressor",
                                 QueueBackend(["not json at all"]))
    ranked_lexical = rank_tools(reg, "instrument for an endogenous regressor")
    assert ranked_fallback == ranked_lexical
    # out-of-range scores are rejected the same way
    bad = {name: 2.0 for name in reg.names()}
    assert rank_tools(reg, "x", QueueBackend([json.dumps(bad)]))[0][1] <= 1.0


def test_empty_registry_cannot_rank():
    with pytest.raises(ValueError):
        rank_tools(ToolRegistry(), "anything")


# ---------------------------------------------------------------------------
# invocation boundary
# ---------------------------------------------------------------------------


def _store():
    table = build_table(
        {
            "y": ("real", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            "x": ("real", [0.5, 1.0, 1.5, 2.5, 2.0, 3.5]),
        }
    )
    return {"t": table}


def test_invoke_ok_outcome():
    out = invoke_tool(
        default_registry(), "ols", {"table": "t", "outcome": "y", "regressors": ["x"]},
        _store(),
    )
    assert out.ok and out.status == "ok"
    assert out.error_message is None
    assert out.echo_args["table"] == "t"
    obj = out.to_json_obj()
    assert "elapsed_ms" not in obj
    assert obj["result"]["method"] == "ols"


def test_invoke_validation_error_is_plain_message():
    out = invoke_tool(default_registry(), "ols", {"table": "t"}, _store())
    assert out.status == "error"
    assert "outcome" in out.error_message
    assert ":" not in out.error_message.split("'")[0] or "required" in out.error_message


def test_invoke_handler_error_carries_type_name():
    out = invoke_tool(
        default_registry(),
        "ols",
        {"table": "missing", "outcome": "y", "regressors": ["x"]},
        _store(),
    )
    assert out.status == "error"
    assert out.error_message.split(":")[0].endswith("Error")


def test_invoke_unknown_tool_raises():
    with pytest.raises(UnknownToolError):
        invoke_tool(default_registry(), "no_such_tool", {}, _store())


def test_invoke_is_deterministic_modulo_timing():
    args = {"table": "t", "outcome": "y", "regressors": ["x"]}
    a = invoke_tool(default_registry(), "ols", args, _store())
    b = invoke_tool(default_registry(), "ols", args, _store())
    assert a.to_json_obj() == b.to_json_obj()


def test_outcome_invariants():
    with pytest.raises(ValueError):
        ToolOutcome("ok")
    with pytest.raises(ValueError):
        ToolOutcome("error", result=1, error_message="both")
    with pytest.raises(ValueError):
        ToolOutcome("maybe", result=1)


def test_builtin_registry_is_complete():
    reg = default_registry()
    assert len(reg) == 14
    for desc in reg.descriptors():
        assert desc.handler is not None
        assert desc.summary is not None
        assert desc.summary.target_scenario.strip()
