"""Difference-in-differences: static two-way FE and staggered event study."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import EstimationError, NameCollisionError, NoTreatedUnitsError
from .linear import panel_ols
from .results import FitResult, RegressionSpec, VcovSpec
from .table import Column, DataTable


@dataclass(frozen=True)
class EventStudyResult:
    """Lead/lag coefficient profile around adoption.

    The underlying fit carries one coefficient per relative-time dummy;
    ``reference_period`` is the omitted relative time (always −1).
    """

    fit: FitResult
    see_back: int
    see_forward: int
    reference_period: int = -1


def did_static(
    table: DataTable,
    outcome: str,
    treatment_indicator: str,
    unit: str,
    time: str,
    controls: Sequence[str] = (),
    vcov: Optional[VcovSpec] = None,
) -> FitResult:
    """Static DID: two-way fixed effects with a post-treatment indicator.

    Delegates to the panel estimator with unit and time fixed effects;
    standard errors default to clustering on the unit.
    """
    tvals = {
        float(v)
        for v in table.column(treatment_indicator).values
        if v is not None
    }
    if not tvals <= {0.0, 1.0}:
        raise EstimationError(
            f"treatment indicator '{treatment_indicator}' must be 0/1 per row"
        )
    spec = RegressionSpec(
        outcome=outcome,
        regressors=(treatment_indicator, *controls),
        fixed_effect_factors=(unit, time),
        vcov=vcov or VcovSpec.cluster(unit),
    )
    fit = panel_ols(table, spec)
    return replace(fit, method="did_static")


def _relative_time_labels(
    see_back: int, see_forward: int, lag_indexing: str
) -> list[tuple[str, int]]:
    """(label, relative time) pairs in display order, including the reference."""
    offset = 1 if lag_indexing == "one_based" else 0
    pairs = [(f"Lead_D{k}", -k) for k in range(see_back, 0, -1)]
    pairs += [(f"Lag_D{k + offset}", k) for k in range(0, see_forward + 1)]
    return pairs


def did_event_study(
    table: DataTable,
    outcome: str,
    unit: str,
    time: str,
    adoption_time: str,
    see_back: int,
    see_forward: int,
    controls: Sequence[str] = (),
    vcov: Optional[VcovSpec] = None,
    lag_indexing: str = "zero_based",
) -> EventStudyResult:
    """Staggered event study with binned endpoint dummies.

    For each treated row the relative time r = time − adoption is mapped to
    a dummy: Lead_Dk for r = −k (k up to ``see_back``, with values beyond
    binned into the endpoint) and Lag_Dk for r = k ≥ 0 (endpoint binned
    likewise).  Rows of never-treated units (missing adoption period) carry
    all dummies 0; the reference period r = −1 is the omitted dummy.  The
    profile is estimated with two-way unit/time fixed effects, clustered on
    the unit by default.  ``lag_indexing='one_based'`` only relabels the
    lag dummies (adoption period becomes Lag_D1).
    """
    if see_back < 1:
        raise ValueError("see_back must be >= 1")
    if see_forward < 0:
        raise ValueError("see_forward must be >= 0")
    if lag_indexing not in ("zero_based", "one_based"):
        raise ValueError(f"unknown lag_indexing '{lag_indexing}'")

    time_col = table.column(time)
    adopt_col = table.column(adoption_time)
    if all(v is None for v in adopt_col.values):
        raise NoTreatedUnitsError()

    pairs = _relative_time_labels(see_back, see_forward, lag_indexing)
    reference_label = next(label for label, r in pairs if r == -1)

    def label_for(r: float) -> str:
        r = int(round(r))
        r = max(-see_back, min(see_forward, r))
        return next(label for label, rr in pairs if rr == r)

    dummy_values: dict[str, list] = {label: [] for label, _ in pairs}
    for i in range(table.n_rows):
        t, a = time_col.values[i], adopt_col.values[i]
        if t is None:
            for label in dummy_values:
                dummy_values[label].append(None)
            continue
        active = None if a is None else label_for(float(t) - float(a))
        for label in dummy_values:
            dummy_values[label].append(int(label == active))

    work = table
    for label, _ in pairs:
        if label in work.names:
            raise NameCollisionError(label)
        work = work.with_column(Column(label, "integer", tuple(dummy_values[label])))

    regressors = [label for label, r in pairs if label != reference_label]
    spec = RegressionSpec(
        outcome=outcome,
        regressors=(*regressors, *controls),
        fixed_effect_factors=(unit, time),
        vcov=vcov or VcovSpec.cluster(unit),
    )
    fit = panel_ols(work, spec)
    fit = replace(
        fit,
        method="did_event_study",
        notes=fit.notes + (f"reference period: r = -1 ({reference_label} omitted)",),
    )
    return EventStudyResult(fit, see_back, see_forward, -1)
