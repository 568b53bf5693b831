"""Shared fixtures: deterministic datasets and scripted-backend builders."""

from __future__ import annotations

import json

import numpy as np
import pytest

from econagent.table import Column, DataTable


def build_table(spec: dict, name: str = "t") -> DataTable:
    """Construct a table from {name: (kind, values)} pairs."""
    cols = tuple(Column(n, kind, tuple(values)) for n, (kind, values) in spec.items())
    return DataTable(cols, name=name)


@pytest.fixture
def table_builder():
    return build_table


def _write_csv(path, header: str, rows: list[str]) -> str:
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture(scope="session")
def births_csv(tmp_path_factory) -> str:
    """A birth-weight-shaped observational dataset with known selection.

    Treatment take-up depends on the mother's age and education; the
    outcome carries a constant effect of -200 plus covariate structure.
    """
    rng = np.random.default_rng(20240817)
    n = 1200
    dmage = rng.uniform(18, 42, n)
    dmeduc = rng.integers(8, 18, n).astype(float)
    race = rng.integers(1, 4, n)
    logits = 1.2 - 0.06 * dmage - 0.05 * dmeduc + 0.15 * (race == 2)
    tobacco = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logits))).astype(int)
    dbrwt = (
        2800.0
        + 12.0 * dmage
        + 25.0 * dmeduc
        + 40.0 * (race == 3)
        - 200.0 * tobacco
        + rng.normal(0.0, 90.0, n)
    )
    rows = [
        f"{float(dmage[i])!r},{float(dmeduc[i])!r},{int(race[i])},{int(tobacco[i])},{float(dbrwt[i])!r}"
        for i in range(n)
    ]
    path = tmp_path_factory.mktemp("data") / "births.csv"
    return _write_csv(path, "dmage,dmeduc,mrace3,tobacco,dbrwt", rows)


@pytest.fixture(scope="session")
def panel_csv(tmp_path_factory) -> str:
    """A 30-unit staggered-adoption panel with a step effect of 5.0."""
    rng = np.random.default_rng(7)
    units, periods = 30, 12
    rows = []
    for u in range(units):
        alpha = rng.normal(0, 2)
        adopt = int(rng.integers(4, 10)) if u % 3 else ""
        for t in range(periods):
            gamma = 0.3 * t
            treated = 1 if adopt != "" and t >= adopt else 0
            y = alpha + gamma + 5.0 * treated + rng.normal(0, 0.5)
            state = "A" if u < 15 else "B"
            rows.append(f"{u},{t},{adopt},{treated},{float(y)!r},{state}")
    path = tmp_path_factory.mktemp("data") / "panel.csv"
    return _write_csv(path, "unit,time,adopt,treated,y,state", rows)


def ps_case_plan_reply(data_path: str) -> str:
    """The three-step decomposition of the observational smoking task."""
    return json.dumps(
        [
            {
                "description": f"Load and preprocess the dataset at {data_path}",
                "action": "data_loading",
            },
            {
                "description": "Perform exploratory data analysis on the loaded table",
                "action": "exploratory_analysis",
            },
            {
                "description": (
                    "Apply the propensity score regression adjustment method to "
                    "estimate the average treatment effect, controlling for the "
                    "specified variables and trimming extreme scores"
                ),
                "action": "estimation",
                "econometric_tag": "propensity score regression",
            },
        ]
    )


def ps_case_args(valid_outcome: str = "dbrwt") -> dict:
    return {
        "table": "births",
        "treatment": "tobacco",
        "outcome": valid_outcome,
        "covariates": ["dmage", "dmeduc", "mrace3"],
        "categorical": ["mrace3"],
        "trim_mode": "quantile",
        "trim_lower": 0.1,
        "trim_upper": 0.9,
    }


@pytest.fixture
def ps_case_fixture(births_csv):
    """Scripted conversation for the propensity case: plan, then arguments."""
    return [
        {
            "expect_substring": "Decompose the request",
            "reply": {"text": ps_case_plan_reply(births_csv)},
        },
        {
            "expect_substring": "Provide arguments",
            "reply": {
                "tool_call": {"name": "ps_regression_adjustment", "args": ps_case_args()}
            },
        },
    ]


@pytest.fixture
def ps_case_reflect_fixture(births_csv):
    """Same case, but the first argument set names a wrong outcome column."""
    return [
        {
            "expect_substring": "Decompose the request",
            "reply": {"text": ps_case_plan_reply(births_csv)},
        },
        {
            "expect_substring": "Provide arguments",
            "reply": {
                "tool_call": {
                    "name": "ps_regression_adjustment",
                    "args": ps_case_args(valid_outcome="birthweight"),
                }
            },
        },
        {
            "expect_substring": "unknown column",
            "reply": {
                "tool_call": {"name": "ps_regression_adjustment", "args": ps_case_args()}
            },
        },
    ]


@pytest.fixture
def ps_case_request(births_csv) -> str:
    return (
        "Please use the propensity score regression method to compute the "
        "effect of tobacco on dbrwt. You also need to control the following "
        "control variables: dmage, dmeduc, mrace3. Besides, you need to "
        "consider the following requirements: mrace3 is a multi-class "
        "categorical variable. Trim the samples with the highest 10% score "
        "and the lowest 10% score. You could load the corresponding data "
        f"from {births_csv}."
    )


# ---------------------------------------------------------------------------
# acceptance scoreboard: one visible line per criterion at the end of the run
# ---------------------------------------------------------------------------

_acceptance_reports: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        _acceptance_reports[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_reports):
        report = _acceptance_reports[nodeid]
        name = nodeid.split("::test_criterion_", 1)[1]
        number, _, label = name.partition("_")
        if report.skipped:
            reason = ""
            if isinstance(report.longrepr, tuple):
                reason = str(report.longrepr[2]).removeprefix("Skipped: ")
            verdict = f"SKIPPED ({reason})"
        elif report.passed:
            verdict = "PASS"
        else:
            verdict = "FAIL"
        terminalreporter.write_line(
            f"criterion {number} ({label.replace('_', ' ')}): {verdict}"
        )
