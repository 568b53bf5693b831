"""Benchmark task specifications and the corpus file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

METHODS = ("ols_panel", "propensity", "iv", "did", "rdd")

TAGS = ("data_processing", "covariance_adjustment", "fixed_effects")

#: how each method family is spelled inside the task prompt
_METHOD_LABELS = {
    "ols_panel": "OLS",
    "propensity": "propensity score regression",
    "iv": "2SLS",
    "did": "Staggered DID Event Study",
    "rdd": "RDD",
}


def method_label(method: str) -> str:
    if method not in _METHOD_LABELS:
        raise ValueError(f"unknown method '{method}'")
    return _METHOD_LABELS[method]


@dataclass(frozen=True)
class Expected:
    """The reference answer a run is scored against."""

    coefficient: float
    standard_error: float
    p_value: float

    def __post_init__(self) -> None:
        if not self.standard_error > 0:
            raise ValueError("expected standard error must be positive")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("expected p-value must lie in [0, 1]")


@dataclass(frozen=True)
class TaskSpec:
    """One benchmark task: what to estimate, on what data, and the answer."""

    id: str
    method: str
    treatment: str
    outcome: str
    controls: tuple[str, ...]
    requirements: str
    data_path: str
    expected: Expected
    tags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"task {self.id}: unknown method '{self.method}'")
        bad = [t for t in self.tags if t not in TAGS]
        if bad:
            raise ValueError(f"task {self.id}: unknown tags {bad}")

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "method": self.method,
            "treatment": self.treatment,
            "outcome": self.outcome,
            "controls": list(self.controls),
            "requirements": self.requirements,
            "data_path": self.data_path,
            "expected": {
                "coefficient": self.expected.coefficient,
                "standard_error": self.expected.standard_error,
                "p_value": self.expected.p_value,
            },
            "tags": list(self.tags),
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "TaskSpec":
        exp = obj["expected"]
        return TaskSpec(
            id=str(obj["id"]),
            method=obj["method"],
            treatment=obj["treatment"],
            outcome=obj["outcome"],
            controls=tuple(obj.get("controls", [])),
            requirements=str(obj.get("requirements", "")),
            data_path=str(obj["data_path"]),
            expected=Expected(
                float(exp["coefficient"]),
                float(exp["standard_error"]),
                float(exp["p_value"]),
            ),
            tags=tuple(obj.get("tags", [])),
        )


def load_tasks(path: str | Path) -> list[TaskSpec]:
    """Read a JSON array of task objects."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"task corpus {path} must be a JSON array")
    return [TaskSpec.from_json_obj(obj) for obj in raw]
