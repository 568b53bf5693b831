"""Replication scoring: error measures, class labels and the metric battery."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Optional

from .runners import RunRecord
from .tasks import METHODS, TAGS, Expected, TaskSpec

#: replication classes, from best to worst
CLASSES = ("perfect", "partial_only", "neither", "failed")


def relative_error(got: float, expected: float) -> float:
    """L1 distance scaled by the expected magnitude.

    A zero expected value degrades to the absolute error so the measure
    stays defined; callers comparing against percentage thresholds should
    treat that case with care.
    """
    if expected == 0:
        return abs(got)
    return abs(got - expected) / abs(expected)


def significance_level(p: float) -> int:
    """Star-convention bin: 3 below 1%, 2 below 5%, 1 below 10%, else 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value {p} outside [0, 1]")
    if p < 0.01:
        return 3
    if p < 0.05:
        return 2
    if p < 0.10:
        return 1
    return 0


def _errors(record: RunRecord, expected: Expected, p_mode: str) -> tuple[float, float, float]:
    got_c, got_s, got_p = record.extracted
    ce = relative_error(got_c, expected.coefficient)
    se = relative_error(got_s, expected.standard_error)
    if p_mode == "relative":
        pe = relative_error(got_p, expected.p_value)
    else:
        pe = abs(got_p - expected.p_value)
    return ce, se, pe


def classify_replication(
    record: RunRecord, expected: Expected, p_perfect_mode: str = "absolute"
) -> str:
    """Label one run: perfect, partial_only, neither or failed.

    Perfect needs coefficient and standard-error relative errors below 1%
    and a p-value error below 0.01; partial needs the two relative errors
    below 5%.  The p-value error is absolute by default, relative when
    ``p_perfect_mode`` says so.
    """
    if p_perfect_mode not in ("absolute", "relative"):
        raise ValueError(f"unknown p_perfect_mode '{p_perfect_mode}'")
    if not record.completed:
        return "failed"
    ce, se, pe = _errors(record, expected, p_perfect_mode)
    if ce < 0.01 and se < 0.01 and pe < 0.01:
        return "perfect"
    if ce < 0.05 and se < 0.05:
        return "partial_only"
    return "neither"


@dataclass(frozen=True)
class MetricReport:
    """Every row of the replication scoreboard, plus the breakdowns.

    Rates use the full task count as denominator; medians and means are
    taken over completed runs only and are None when no run completed.
    """

    n_tasks: int
    n_completed: int
    compilation_rate: float
    perfect_rate: float
    partial_rate: float
    direction_rate: float
    coef_median_rel_error: Optional[float]
    coef_share_lt_1pct: float
    coef_share_lt_10pct: float
    se_median_rel_error: Optional[float]
    se_share_lt_1pct: float
    se_share_lt_10pct: float
    p_mean_abs_error: Optional[float]
    p_median_abs_error: Optional[float]
    p_share_lt_1pct: float
    p_share_lt_10pct: float
    sig_correct_rate: float
    sig_error_1_rate: float
    sig_error_2_rate: float
    sig_error_3_rate: float
    per_method_partial: dict = field(default_factory=dict)
    per_tag_partial: dict = field(default_factory=dict)
    classes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for name in (
            "compilation_rate",
            "perfect_rate",
            "partial_rate",
            "direction_rate",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")

    def to_json_obj(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = list(value)
            out[name] = value
        return out


def aggregate_metrics(
    records: list[RunRecord], tasks: list[TaskSpec], p_perfect_mode: str = "absolute"
) -> MetricReport:
    """Compute the full battery over index-aligned records and tasks."""
    if len(records) != len(tasks):
        raise ValueError("records and tasks must align")
    n = len(tasks)
    if n == 0:
        raise ValueError("empty task list")

    classes = [
        classify_replication(r, t.expected, p_perfect_mode) for r, t in zip(records, tasks)
    ]
    completed = [(r, t) for r, t in zip(records, tasks) if r.completed]

    coef_rel, se_rel, p_abs = [], [], []
    direction = 0
    sig_diffs: list[int] = []
    for record, task in completed:
        got_c, got_s, got_p = record.extracted
        coef_rel.append(relative_error(got_c, task.expected.coefficient))
        se_rel.append(relative_error(got_s, task.expected.standard_error))
        p_abs.append(abs(got_p - task.expected.p_value))
        expected_c = task.expected.coefficient
        if (got_c > 0) == (expected_c > 0) and (got_c < 0) == (expected_c < 0):
            direction += 1
        got_p_clipped = min(max(got_p, 0.0), 1.0)
        sig_diffs.append(
            abs(significance_level(got_p_clipped) - significance_level(task.expected.p_value))
        )

    def rate(count: int) -> float:
        return count / n

    def median(values: list[float]) -> Optional[float]:
        return statistics.median(values) if values else None

    perfect = classes.count("perfect")
    partial = perfect + classes.count("partial_only")

    per_method: dict[str, Optional[float]] = {}
    for method in METHODS:
        idx = [i for i, t in enumerate(tasks) if t.method == method]
        if not idx:
            per_method[method] = None
        else:
            hits = sum(1 for i in idx if classes[i] in ("perfect", "partial_only"))
            per_method[method] = hits / len(idx)
    per_tag: dict[str, Optional[float]] = {}
    for tag in TAGS:
        idx = [i for i, t in enumerate(tasks) if tag in t.tags]
        if not idx:
            per_tag[tag] = None
        else:
            hits = sum(1 for i in idx if classes[i] in ("perfect", "partial_only"))
            per_tag[tag] = hits / len(idx)

    return MetricReport(
        n_tasks=n,
        n_completed=len(completed),
        compilation_rate=rate(len(completed)),
        perfect_rate=rate(perfect),
        partial_rate=rate(partial),
        direction_rate=rate(direction),
        coef_median_rel_error=median(coef_rel),
        coef_share_lt_1pct=rate(sum(1 for e in coef_rel if e < 0.01)),
        coef_share_lt_10pct=rate(sum(1 for e in coef_rel if e < 0.10)),
        se_median_rel_error=median(se_rel),
        se_share_lt_1pct=rate(sum(1 for e in se_rel if e < 0.01)),
        se_share_lt_10pct=rate(sum(1 for e in se_rel if e < 0.10)),
        p_mean_abs_error=(sum(p_abs) / len(p_abs)) if p_abs else None,
        p_median_abs_error=median(p_abs),
        p_share_lt_1pct=rate(sum(1 for e in p_abs if e < 0.01)),
        p_share_lt_10pct=rate(sum(1 for e in p_abs if e < 0.10)),
        sig_correct_rate=rate(sum(1 for d in sig_diffs if d == 0)),
        sig_error_1_rate=rate(sum(1 for d in sig_diffs if d == 1)),
        sig_error_2_rate=rate(sum(1 for d in sig_diffs if d == 2)),
        sig_error_3_rate=rate(sum(1 for d in sig_diffs if d == 3)),
        per_method_partial=per_method,
        per_tag_partial=per_tag,
        classes=tuple(classes),
    )
