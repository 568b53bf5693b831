"""Plan templates, family detection, and reply parsing invariants."""

from __future__ import annotations

import json
import random

import pytest

from econagent.agent import PlanParseError, detect_family, parse_plan_reply, template_plan
from econagent.agent.plan import ACTIONS, FAMILIES


@pytest.mark.parametrize(
    "request_text,family",
    [
        ("Please use the propensity score regression method", "propensity"),
        ("one-to-one matching on observables", "propensity"),
        ("Please use the 2SLS method to compute the effect", "iv"),
        ("use distance as an instrument for schooling", "iv"),
        ("two-stage least squares with rainfall", "iv"),
        ("Staggered DID Event Study of the policy", "did"),
        ("difference-in-differences around adoption", "did"),
        ("check the parallel trends assumption", "did"),
        ("sharp regression discontinuity at the threshold", "rdd"),
        ("fuzzy RDD with age as the running variable", "rdd"),
        ("Please use the OLS method to compute the effect of x on y", "regression"),
        ("estimate a panel regression with fixed effects", "regression"),
    ],
)
def test_family_detection(request_text, family):
    assert detect_family(request_text) == family


def test_iv_not_triggered_by_substring():
    # "individual" contains "iv" but not as a word
    assert detect_family("effect on individual outcomes") == "regression"


def test_templates_are_five_ordered_steps():
    for family in FAMILIES:
        plan = template_plan(family, "request text")
        assert len(plan.subtasks) == 5
        assert plan.subtasks[0].action == "data_loading"
        assert plan.subtasks[-1].action == "reporting"
        assert [s.id for s in plan.subtasks] == [1, 2, 3, 4, 5]
        for i, step in enumerate(plan.subtasks):
            assert step.action in ACTIONS
            assert step.depends_on == ([] if i == 0 else [i])
            assert step.status == "pending"
        assert any(s.action == "estimation" for s in plan.subtasks)
        assert plan.template_name == family
        assert plan.created_from == "request text"


def test_template_estimation_tags_match_family():
    tags = {
        family: next(
            s.econometric_tag
            for s in template_plan(family, "r").subtasks
            if s.action == "estimation"
        )
        for family in FAMILIES
    }
    assert tags["propensity"] == "propensity score adjustment"
    assert tags["iv"] == "two stage least squares"
    assert tags["did"] == "difference-in-differences"
    assert tags["rdd"] == "regression discontinuity"
    assert tags["regression"] == "linear regression"


def _steps(*actions, deps=None):
    out = []
    for i, action in enumerate(actions, start=1):
        step = {"description": f"step {i}", "action": action}
        if deps is not None and i in deps:
            step["depends_on"] = deps[i]
        out.append(step)
    return out


def test_parse_valid_reply():
    text = json.dumps(_steps("data_loading", "estimation", "reporting"))
    plan = parse_plan_reply(text, "regression", "req")
    assert [s.action for s in plan.subtasks] == [
        "data_loading",
        "estimation",
        "reporting",
    ]
    assert plan.subtasks[1].depends_on == [1]


def test_missing_reporting_step_is_appended():
    text = json.dumps(_steps("data_loading", "estimation"))
    plan = parse_plan_reply(text, "regression", "req")
    assert plan.subtasks[-1].action == "reporting"
    assert len(plan.subtasks) == 3
    assert plan.subtasks[-1].depends_on == [2]


def test_multiple_reporting_steps_rejected():
    text = json.dumps(_steps("data_loading", "reporting", "reporting"))
    with pytest.raises(PlanParseError):
        parse_plan_reply(text, "regression", "req")


def test_reporting_must_come_last():
    text = json.dumps(_steps("data_loading", "reporting", "estimation"))
    with pytest.raises(PlanParseError):
        parse_plan_reply(text, "regression", "req")


def test_dependencies_must_point_backwards():
    steps = _steps("data_loading", "estimation", "reporting")
    steps[0]["depends_on"] = [1]  # self-reference
    with pytest.raises(PlanParseError):
        parse_plan_reply(json.dumps(steps), "regression", "req")
    steps = _steps("data_loading", "estimation", "reporting")
    steps[1]["depends_on"] = [3]  # forward reference
    with pytest.raises(PlanParseError):
        parse_plan_reply(json.dumps(steps), "regression", "req")


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "{}",
        "[]",
        '["just a string"]',
        '[{"action": "estimation"}]',
        '[{"description": "d", "action": "train_model"}]',
        '[{"description": "d", "action": "estimation", "econometric_tag": 7}]',
        '[{"description": "d", "action": "estimation", "depends_on": "1"}]',
    ],
)
def test_malformed_replies_rejected(text):
    with pytest.raises(PlanParseError):
        parse_plan_reply(text, "regression", "req")


def test_random_valid_replies_keep_structural_invariants():
    rng = random.Random(20240815)
    body_actions = [a for a in ACTIONS if a != "reporting"]
    for _ in range(50):
        n = rng.randint(1, 6)
        steps = []
        for i in range(1, n + 1):
            step = {
                "description": f"do thing {i}",
                "action": rng.choice(body_actions),
            }
            if i > 1 and rng.random() < 0.5:
                step["depends_on"] = sorted(
                    rng.sample(range(1, i), rng.randint(1, i - 1))
                )
            steps.append(step)
        if rng.random() < 0.5:
            steps.append({"description": "report", "action": "reporting"})
        plan = parse_plan_reply(json.dumps(steps), "regression", "req")

        ids = [s.id for s in plan.subtasks]
        assert ids == list(range(1, len(ids) + 1))
        assert plan.subtasks[-1].action == "reporting"
        assert sum(1 for s in plan.subtasks if s.action == "reporting") == 1
        for s in plan.subtasks:
            assert all(dep < s.id for dep in s.depends_on)
        assert plan.reporting_step() is plan.subtasks[-1]
