"""Scoreboard rendering: fixed row order, three output formats."""

from __future__ import annotations

import json
from typing import Optional

from .metrics import MetricReport

_METHOD_ROWS = (
    ("ols_panel", "OLS, Panel OLS"),
    ("propensity", "Propensity Score Regression"),
    ("iv", "Instrument Variable (IV)"),
    ("did", "Differences in Differences (DID)"),
    ("rdd", "Regression Discontinuity Designs (RDD)"),
)

_TAG_ROWS = (
    ("data_processing", "Data Processing"),
    ("covariance_adjustment", "Covariance Adjustment"),
    ("fixed_effects", "Fixed Effects"),
)


def _pct(value: Optional[float]) -> str:
    return "—" if value is None else f"{100.0 * value:.2f}%"


def _num(value: Optional[float]) -> str:
    return "—" if value is None else f"{value:.4f}"


def _rows(report: MetricReport) -> list[tuple[str, str]]:
    rows = [
        ("Compilation Success", _pct(report.compilation_rate)),
        ("Perfect Replication", _pct(report.perfect_rate)),
        ("Partial Replication", _pct(report.partial_rate)),
        ("Correct Direction", _pct(report.direction_rate)),
        ("Coefficient Median Error", _pct(report.coef_median_rel_error)),
        ("Coefficient Error < 1%", _pct(report.coef_share_lt_1pct)),
        ("Coefficient Error < 10%", _pct(report.coef_share_lt_10pct)),
        ("Standard Error Median Error", _pct(report.se_median_rel_error)),
        ("Standard Error Error < 1%", _pct(report.se_share_lt_1pct)),
        ("Standard Error Error < 10%", _pct(report.se_share_lt_10pct)),
        ("P-value Average abs Error", _num(report.p_mean_abs_error)),
        ("P-value Median abs Error", _num(report.p_median_abs_error)),
        ("P-value abs Error < 1%", _pct(report.p_share_lt_1pct)),
        ("P-value abs Error < 10%", _pct(report.p_share_lt_10pct)),
        ("Significant Level Correctness", _pct(report.sig_correct_rate)),
        ("Significant Level Error == 1", _pct(report.sig_error_1_rate)),
        ("Significant Level Error == 2", _pct(report.sig_error_2_rate)),
        ("Significant Level Error == 3", _pct(report.sig_error_3_rate)),
    ]
    for key, label in _METHOD_ROWS:
        rows.append((label, _pct(report.per_method_partial.get(key))))
    for key, label in _TAG_ROWS:
        rows.append((label, _pct(report.per_tag_partial.get(key))))
    rows.append(("Number of Tasks", str(report.n_tasks)))
    return rows


def render_report(report: MetricReport, format: str = "text_table") -> str:
    """Render the scoreboard as a text table, CSV, or JSON."""
    if format == "json":
        return json.dumps(report.to_json_obj(), indent=2) + "\n"
    rows = _rows(report)
    if format == "csv":
        lines = ["metric,value"]
        for label, value in rows:
            quoted = '"' + label.replace('"', '""') + '"' if "," in label else label
            lines.append(f"{quoted},{value}")
        return "\n".join(lines) + "\n"
    if format == "text_table":
        width = max(len(label) for label, _ in rows)
        lines = [f"{label:<{width}}  {value}" for label, value in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format '{format}'")
