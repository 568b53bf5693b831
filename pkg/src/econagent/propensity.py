"""Propensity-score methods: estimation, trimming, regression adjustment, matching."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AllTrimmedError, EmptyGroupError
from .logit import logit_fit, predict_proba
from .linear import ols
from .results import FitResult, RegressionSpec, VcovSpec
from .table import Column, DataTable
from .transforms import one_hot_encode

SCORE_COLUMN = "propensity_score"


@dataclass(frozen=True)
class TrimRule:
    """Which propensity scores to keep.

    ``quantile`` mode reads (lower, upper) as empirical score quantiles and
    keeps rows strictly between them; ``threshold`` mode reads them as raw
    score cutoffs and keeps the closed interval.
    """

    mode: str = "quantile"
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in ("quantile", "threshold"):
            raise ValueError(f"unknown trim mode '{self.mode}'")
        if not (0.0 <= self.lower < 0.5):
            raise ValueError("trim lower bound must be in [0, 0.5)")
        if not (0.5 < self.upper <= 1.0):
            raise ValueError("trim upper bound must be in (0.5, 1]")


@dataclass(frozen=True)
class MatchResult:
    """Nearest-neighbor matching estimate.

    ``matches`` holds (unit row, matched row, score distance) triples using
    original table row indices; for the ATE both directions appear.
    """

    estimand: str
    point_estimate: float
    bootstrap_se: Optional[float]
    matches: tuple[tuple[int, int, float], ...]
    n_treated: int
    n_control: int
    model: FitResult
    notes: tuple[str, ...] = field(default_factory=tuple)


def _encode_for_scores(
    table: DataTable, covariates: Sequence[str], categorical: Sequence[str]
) -> tuple[DataTable, list[str]]:
    """One-hot encode the categorical covariates and return the regressor list."""
    unknown = [c for c in categorical if c not in covariates]
    if unknown:
        raise ValueError(f"categorical columns not among covariates: {unknown}")
    encoded = one_hot_encode(table, list(categorical)) if categorical else table
    regressors: list[str] = []
    for cov in covariates:
        if cov in categorical:
            regressors.extend(
                c.name for c in encoded.columns if c.name.startswith(f"{cov}__")
            )
        else:
            regressors.append(cov)
    return encoded, regressors


def estimate_propensity_scores(
    table: DataTable,
    treatment: str,
    covariates: Sequence[str],
    categorical: Sequence[str] = (),
) -> tuple[list[Optional[float]], FitResult]:
    """Logistic propensity scores for every row.

    Categorical covariates are dummy-encoded (reference level dropped)
    before the logit fit; rows with a missing covariate get a missing
    score.
    """
    encoded, regressors = _encode_for_scores(table, covariates, categorical)
    spec = RegressionSpec(outcome=treatment, regressors=tuple(regressors))
    model = logit_fit(encoded, spec)
    scores = predict_proba(model, encoded)
    return scores, model


def trim_by_score(scores: Sequence[Optional[float]], rule: TrimRule) -> np.ndarray:
    """Boolean keep-mask over scores; missing scores are never kept.

    Quantile mode keeps rows whose score lies strictly between the lower
    and upper empirical quantiles (linear-interpolation definition), so a
    10%/90% rule on 100 distinct scores keeps exactly 80 rows.
    """
    if len(scores) == 0:
        raise ValueError("scores must be nonempty")
    arr = np.array([np.nan if s is None else float(s) for s in scores])
    present = ~np.isnan(arr)
    if not present.any():
        raise AllTrimmedError()
    if rule.mode == "quantile":
        lo = float(np.quantile(arr[present], rule.lower))
        hi = float(np.quantile(arr[present], rule.upper))
        keep = present & (arr > lo) & (arr < hi)
    else:
        keep = present & (arr >= rule.lower) & (arr <= rule.upper)
    if not keep.any():
        raise AllTrimmedError()
    return keep


def ps_regression_adjustment(
    table: DataTable,
    treatment: str,
    outcome: str,
    covariates: Sequence[str],
    categorical: Sequence[str] = (),
    trim: Optional[TrimRule] = None,
    include_covariates_second_stage: bool = False,
    vcov: Optional[VcovSpec] = None,
) -> FitResult:
    """Treatment-effect estimate by regression on the propensity score.

    Scores are fitted on the full estimation sample, the trim rule is
    applied, and the outcome is regressed on the treatment and the score
    (plus the encoded covariates when requested) over the surviving rows.
    The treatment coefficient is the reported effect.
    """
    encoded, regressors = _encode_for_scores(table, covariates, categorical)
    spec = RegressionSpec(outcome=treatment, regressors=tuple(regressors))
    model = logit_fit(encoded, spec)
    scores = predict_proba(model, encoded)

    if trim is not None:
        keep = trim_by_score(scores, trim)
    else:
        keep = np.array([s is not None for s in scores])
        if not keep.any():
            raise AllTrimmedError()

    score_name = SCORE_COLUMN
    while score_name in encoded.names:
        score_name = "_" + score_name
    with_score = encoded.with_column(
        Column(score_name, "real", tuple(scores))
    ).select_rows(keep)

    stage2 = [treatment, score_name]
    if include_covariates_second_stage:
        stage2.extend(regressors)
    fit = ols(
        with_score,
        RegressionSpec(outcome=outcome, regressors=tuple(stage2), vcov=vcov or VcovSpec()),
    )
    n_scored = int(sum(s is not None for s in scores))
    notes = fit.notes + (
        f"propensity scores fitted on {model.n_obs} rows; trim kept {int(keep.sum())} of {n_scored}",
    )
    return FitResult(
        method="ps_regression_adjustment",
        coefficient_names=fit.coefficient_names,
        coefficients=fit.coefficients,
        covariance=fit.covariance,
        standard_errors=fit.standard_errors,
        p_values=fit.p_values,
        n_obs=fit.n_obs,
        dof_resid=fit.dof_resid,
        r_squared=fit.r_squared,
        notes=notes,
    )


def _nearest(
    i: int, scores: np.ndarray, candidates: np.ndarray, ratio: int
) -> list[tuple[int, float]]:
    """The ratio nearest candidates to unit i by score distance, ties by index."""
    dist = np.abs(scores[candidates] - scores[i])
    order = np.lexsort((candidates, dist))
    picked = order[:ratio]
    return [(int(candidates[j]), float(dist[j])) for j in picked]


def _match_once(
    scores: np.ndarray,
    treated: np.ndarray,
    y: np.ndarray,
    estimand: str,
    ratio: int,
    with_replacement: bool,
    row_labels: np.ndarray,
) -> tuple[float, list[tuple[int, int, float]]]:
    t_idx = np.flatnonzero(treated)
    c_idx = np.flatnonzero(~treated)
    if t_idx.size == 0:
        raise EmptyGroupError("treated")
    if c_idx.size == 0:
        raise EmptyGroupError("control")

    matches: list[tuple[int, int, float]] = []

    def impute(query: np.ndarray, pool: np.ndarray) -> np.ndarray:
        """Mean matched outcome for each query unit."""
        out = np.empty(query.size)
        available = pool.copy()
        for pos, i in enumerate(query):
            cands = available if not with_replacement else pool
            if cands.size == 0:
                raise EmptyGroupError("matching pool exhausted")
            picked = _nearest(i, scores, cands, ratio)
            out[pos] = float(np.mean([y[j] for j, _ in picked]))
            for j, dj in picked:
                matches.append((int(row_labels[i]), int(row_labels[j]), dj))
            if not with_replacement:
                used = {j for j, _ in picked}
                available = np.array([j for j in available if j not in used])
        return out

    if estimand == "ATET":
        y0_hat = impute(t_idx, c_idx)
        est = float(np.mean(y[t_idx] - y0_hat))
    else:
        y0_hat = impute(t_idx, c_idx)
        y1_hat = impute(c_idx, t_idx)
        contrasts = np.concatenate([y[t_idx] - y0_hat, y1_hat - y[c_idx]])
        est = float(np.mean(contrasts))
    return est, matches


def ps_matching(
    table: DataTable,
    treatment: str,
    outcome: str,
    covariates: Sequence[str],
    categorical: Sequence[str] = (),
    estimand: str = "ATE",
    ratio: int = 1,
    with_replacement: bool = True,
    bootstrap_reps: int = 0,
    seed: int = 0,
) -> MatchResult:
    """Nearest-neighbor matching on the estimated propensity score.

    ATET averages (own outcome − matched control outcome) over treated
    units.  ATE matches every unit to its nearest opposite-group
    neighbor(s) and averages the signed imputed contrast over all units:
    y − ŷ₀ for treated rows, ŷ₁ − y for controls.  Ties are broken by the
    lowest row index.  When ``bootstrap_reps`` > 0 the standard error is
    the spread of the estimate over resampled tables, with scores re-fitted
    per replication; each replication draws from an independent seeded
    stream so results do not depend on evaluation order.
    """
    if estimand not in ("ATE", "ATET"):
        raise ValueError(f"unknown estimand '{estimand}'")
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    if not with_replacement and ratio != 1:
        raise ValueError("matching without replacement supports ratio=1 only")

    encoded, regressors = _encode_for_scores(table, covariates, categorical)
    needed = [treatment, outcome, *regressors]
    mask = encoded.complete_mask(needed)
    est_table = encoded.select_rows(mask)
    row_labels = np.flatnonzero(mask)

    model = logit_fit(
        est_table, RegressionSpec(outcome=treatment, regressors=tuple(regressors))
    )
    score_list = predict_proba(model, est_table)
    scores = np.array([float(s) for s in score_list])
    treated = est_table.column(treatment).numeric() > 0.5
    y = est_table.column(outcome).numeric()

    est, matches = _match_once(
        scores, treated, y, estimand, ratio, with_replacement, row_labels
    )

    notes: list[str] = []
    boot_se = None
    if bootstrap_reps > 0:
        reps = []
        failed = 0
        n = est_table.n_rows
        for rep in range(bootstrap_reps):
            rng = np.random.default_rng((seed, rep))
            draw = rng.integers(0, n, size=n)
            sample = _take_rows(est_table, draw)
            try:
                m = logit_fit(
                    sample, RegressionSpec(outcome=treatment, regressors=tuple(regressors))
                )
                s = np.array([float(v) for v in predict_proba(m, sample)])
                t = sample.column(treatment).numeric() > 0.5
                yy = sample.column(outcome).numeric()
                e, _ = _match_once(
                    s, t, yy, estimand, ratio, with_replacement, np.arange(n)
                )
                reps.append(e)
            except Exception:
                failed += 1
        if len(reps) >= 2:
            boot_se = float(np.std(reps, ddof=1))
        if failed:
            notes.append(f"bootstrap: {failed} of {bootstrap_reps} replications failed")

    n_dropped = table.n_rows - est_table.n_rows
    if n_dropped:
        notes.append(f"dropped {n_dropped} row(s) with missing values")
    return MatchResult(
        estimand=estimand,
        point_estimate=est,
        bootstrap_se=boot_se,
        matches=tuple(matches),
        n_treated=int(treated.sum()),
        n_control=int((~treated).sum()),
        model=model,
        notes=tuple(notes),
    )


def _take_rows(table: DataTable, indices: np.ndarray) -> DataTable:
    """Row-indexed resample (with repetition allowed)."""
    cols = tuple(
        Column(c.name, c.kind, tuple(c.values[i] for i in indices)) for c in table.columns
    )
    return DataTable(cols, table.notes, table.name)
