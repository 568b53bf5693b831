"""Final result packaging: the three-number JSON every run must emit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional


def round_sig(value: float, digits: int = 10) -> float:
    """Round to ``digits`` significant digits (0, inf and nan pass through)."""
    if value == 0 or not math.isfinite(value):
        return value
    magnitude = math.floor(math.log10(abs(value)))
    return round(value, digits - 1 - magnitude)


def _json_number(value: float):
    """Ints stay ints so 1.0 prints as 1; other floats use the shortest repr."""
    if not math.isfinite(value):
        raise ValueError(f"result value {value!r} is not a finite number")
    if float(value).is_integer() and abs(value) < 1e16:
        return int(value)
    return float(value)


@dataclass(frozen=True)
class FinalReport:
    """The reported effect: coefficient, standard error and p-value.

    Values are rounded to 10 significant digits at construction;
    ``json_text`` is the exact serialized form with the key spelled
    "p-value", and parsing it back recovers the stored numbers.
    """

    coefficient: float
    standard_error: float
    p_value: float
    method: str = ""
    full_result: Any = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", round_sig(float(self.coefficient)))
        object.__setattr__(self, "standard_error", round_sig(float(self.standard_error)))
        object.__setattr__(self, "p_value", round_sig(float(self.p_value)))

    @property
    def json_text(self) -> str:
        payload = {
            "coefficient": _json_number(self.coefficient),
            "standard_error": _json_number(self.standard_error),
            "p-value": _json_number(self.p_value),
        }
        return json.dumps(payload, separators=(", ", ": "), allow_nan=False)


def export_result_json(report: FinalReport, path: str | Path) -> None:
    """Write the result JSON: one object, one trailing newline, nothing else."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.json_text + "\n", encoding="utf-8")


@dataclass(frozen=True)
class FailureSummary:
    """Why a run produced no report: the failing step and its archived errors."""

    subtask_id: int
    description: str
    errors: tuple[str, ...]

    def render_text(self) -> str:
        lines = [f"step {self.subtask_id} failed: {self.description}"]
        for i, err in enumerate(self.errors, start=1):
            lines.append(f"  attempt {i}: {err}")
        return "\n".join(lines)


def report_from_result(
    result: Any, echo_args: Optional[dict] = None, lag_indexing: str = "zero_based"
) -> FinalReport:
    """Extract the effect row from any estimator result object.

    Fit results use the treatment column echoed in the arguments when it
    names a coefficient, otherwise the first non-intercept coefficient
    (with a warning note).  Event studies report the adoption-period lag;
    RDD results their effect; match results the point estimate with the
    bootstrap SE when present.
    """
    from ..did import EventStudyResult
    from ..propensity import MatchResult
    from ..rdd import RddResult
    from ..results import FitResult

    echo_args = echo_args or {}
    notes: list[str] = []

    if isinstance(result, EventStudyResult):
        first_lag = "Lag_D1" if lag_indexing == "one_based" else "Lag_D0"
        coef, se, p = result.fit.row(first_lag)
        return FinalReport(coef, se, p, result.fit.method, result, (f"reported {first_lag}",))

    if isinstance(result, FitResult):
        target = echo_args.get("treatment")
        if target is None and echo_args.get("endogenous"):
            target = echo_args["endogenous"][0]
        if target is None or target not in result.coefficient_names:
            candidates = [n for n in result.coefficient_names if n != "const"]
            if not candidates:
                raise ValueError("fit has no reportable coefficient")
            if target is not None:
                notes.append(f"treatment '{target}' not among coefficients")
            target = candidates[0]
            notes.append(f"reported first non-intercept coefficient '{target}'")
        coef, se, p = result.row(target)
        return FinalReport(coef, se, p, result.method, result, tuple(notes))

    if isinstance(result, RddResult):
        return FinalReport(
            result.effect, result.standard_error, result.p_value, f"rdd_{result.design}", result
        )

    if isinstance(result, MatchResult):
        se = result.bootstrap_se
        if se is None:
            se = 0.0
            notes.append("no bootstrap standard error requested; reported as 0")
        if se > 0:
            from scipy import stats

            p = float(2.0 * stats.norm.sf(abs(result.point_estimate / se)))
        else:
            p = 0.0 if result.point_estimate != 0 else 1.0
        return FinalReport(
            result.point_estimate, se, p, f"ps_matching_{result.estimand}", result, tuple(notes)
        )

    raise TypeError(f"cannot report a result of type {type(result).__name__}")
