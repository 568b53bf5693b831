"""Least-squares estimators: OLS and fixed-effect panel regression.

Both estimators share a single solve-and-sandwich core: orthogonal
decomposition (SVD) for the coefficients with rank decided at a relative
tolerance of 1e-10, and classical / HC1 / cluster-robust covariance with
Stata small-sample factors.  The panel estimator absorbs fixed effects by
(iterated) within-group demeaning; degrees of freedom are reduced by the
number of absorbed levels so its covariance equals the dummy-saturated OLS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import (
    DegenerateFactorError,
    EstimationError,
    NoConvergenceError,
    NoVariationAfterDemeaningError,
    RankDeficientError,
    TooFewRowsError,
)
from .results import FitResult, RegressionSpec, make_fit_result
from .table import DataTable

RANK_RTOL = 1e-10
DEMEAN_TOL = 1e-10
INTERCEPT = "const"


# ---------------------------------------------------------------------------
# design assembly
# ---------------------------------------------------------------------------


@dataclass
class Design:
    y: np.ndarray
    X: np.ndarray
    names: list[str]
    cluster_ids: Optional[list]
    weights: Optional[np.ndarray]
    factors: list[list]
    n_dropped: int
    row_index: np.ndarray
    vcov_kind: str = "classical"


def build_design(table: DataTable, spec: RegressionSpec) -> Design:
    """Listwise-delete and assemble the regression arrays from a table."""
    needed = [spec.outcome, *spec.regressors, *spec.fixed_effect_factors]
    if spec.vcov.cluster_column:
        needed.append(spec.vcov.cluster_column)
    if spec.weights:
        needed.append(spec.weights)
    mask = table.complete_mask(needed)
    idx = np.flatnonzero(mask)
    n_dropped = table.n_rows - idx.size

    y = table.column(spec.outcome).numeric()[idx]
    names = list(spec.regressors)
    X = table.numeric_matrix(spec.regressors)[idx]
    if spec.include_intercept and not spec.fixed_effect_factors:
        X = np.column_stack([np.ones(idx.size), X])
        names = [INTERCEPT] + names

    cluster_ids = None
    if spec.vcov.cluster_column:
        vals = table.column(spec.vcov.cluster_column).values
        cluster_ids = [vals[i] for i in idx]

    weights = None
    if spec.weights:
        weights = table.column(spec.weights).numeric()[idx]
        if np.any(weights <= 0):
            raise EstimationError("weights must be strictly positive")

    factors = []
    for f in spec.fixed_effect_factors:
        vals = table.column(f).values
        factors.append([vals[i] for i in idx])

    return Design(
        y, X, names, cluster_ids, weights, factors, n_dropped, idx, spec.vcov.kind
    )


# ---------------------------------------------------------------------------
# solve + covariance core
# ---------------------------------------------------------------------------


def solve_ls(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares solve with an explicit rank check.

    Returns (beta, xtx_inv); ``y`` may be a vector or a matrix of stacked
    right-hand sides.  Raises RankDeficient naming the columns that
    participate in the null space.
    """
    n, k = X.shape
    if k == 0:
        raise EstimationError("empty design matrix")
    u_, s, vt = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > (s[0] if s.size else 0.0) * RANK_RTOL))
    if rank < k:
        null = vt[rank:]
        involved = [names[j] for j in range(k) if np.max(np.abs(null[:, j])) > 1e-8]
        raise RankDeficientError(involved or list(names))
    proj = u_.T @ y
    scaled = proj / s if proj.ndim == 1 else proj / s[:, None]
    beta = vt.T @ scaled
    xtx_inv = (vt.T / s**2) @ vt
    return beta, xtx_inv


def p_two_sided(stat: np.ndarray, df: Optional[int]) -> np.ndarray:
    """Two-sided p-values from t(df), or the normal when df is None.

    A zero standard error gives stat = ±inf or nan; by convention the
    p-value is 0 for a nonzero coefficient and 1 for an exact zero.
    """
    stat = np.asarray(stat, dtype=float)
    out = np.empty_like(stat)
    finite = np.isfinite(stat)
    if df is None:
        out[finite] = 2.0 * stats.norm.sf(np.abs(stat[finite]))
    else:
        out[finite] = 2.0 * stats.t.sf(np.abs(stat[finite]), df=max(df, 1))
    out[np.isnan(stat)] = 1.0
    out[np.isinf(stat)] = 0.0
    return out


def sandwich_covariance(
    X: np.ndarray,
    resid: np.ndarray,
    xtx_inv: np.ndarray,
    kind: str,
    cluster_ids: Optional[list],
    dof_resid: int,
) -> tuple[np.ndarray, int]:
    """Covariance matrix and the dof for the p-value reference distribution.

    Small-sample factors follow the Stata conventions: HC1 scales by
    n/(n−k); cluster scales by G/(G−1)·(n−1)/(n−k) and tests against
    t(G−1).  Here n−k is the residual dof passed in, so absorbed fixed
    effects count as estimated parameters.
    """
    n = X.shape[0]
    dof = max(dof_resid, 1)
    if kind == "classical":
        s2 = float(resid @ resid) / dof
        return s2 * xtx_inv, dof
    if kind == "robust_hc1":
        meat = (X * resid[:, None] ** 2).T @ X
        cov = xtx_inv @ meat @ xtx_inv * (n / dof)
        return cov, dof
    if kind == "cluster":
        assert cluster_ids is not None
        groups: dict = {}
        for i, g in enumerate(cluster_ids):
            groups.setdefault(g, []).append(i)
        G = len(groups)
        if G < 2:
            raise EstimationError("cluster covariance needs at least 2 clusters")
        k = X.shape[1]
        meat = np.zeros((k, k))
        for rows in groups.values():
            score = X[rows].T @ resid[rows]
            meat += np.outer(score, score)
        factor = (G / (G - 1)) * ((n - 1) / dof)
        return xtx_inv @ meat @ xtx_inv * factor, G - 1
    raise ValueError(f"unknown vcov kind '{kind}'")


def _finish(
    method: str,
    design: Design,
    X: np.ndarray,
    y: np.ndarray,
    beta: np.ndarray,
    xtx_inv: np.ndarray,
    dof_resid: int,
    centered_r2: bool,
    extra_notes: Sequence[str] = (),
) -> FitResult:
    resid = y - X @ beta
    if dof_resid < 1:
        raise TooFewRowsError(X.shape[0], X.shape[0] - dof_resid + 1)
    cov, p_dof = sandwich_covariance(
        X, resid, xtx_inv, design.vcov_kind, design.cluster_ids, dof_resid
    )
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstats = beta / ses
    pvals = p_two_sided(tstats, p_dof)

    ssr = float(resid @ resid)
    center = y - y.mean() if centered_r2 else y
    sst = float(center @ center)
    r2 = None if sst <= 0 else 1.0 - ssr / sst

    notes = list(extra_notes)
    if design.n_dropped:
        notes.append(f"dropped {design.n_dropped} row(s) with missing values")
    return make_fit_result(
        method, design.names, beta, cov, pvals, X.shape[0], dof_resid, r2, notes
    )


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def ols(table: DataTable, spec: RegressionSpec) -> FitResult:
    """Ordinary (optionally weighted) least squares.

    Computes coefficients by SVD least squares and the covariance chosen in
    ``spec.vcov``.  P-values are two-sided from t(dof_resid); under
    clustering the reference is t(G−1).
    """
    if spec.fixed_effect_factors:
        raise ValueError("use panel_ols for specs with fixed_effect_factors")
    d = build_design(table, spec)
    n, k = d.X.shape
    if n < k + 1:
        raise TooFewRowsError(n, k + 1)
    X, y = d.X, d.y
    if d.weights is not None:
        sw = np.sqrt(d.weights)
        X = X * sw[:, None]
        y = y * sw
    beta, xtx_inv = solve_ls(X, y, d.names)
    return _finish("ols", d, X, y, beta, xtx_inv, n - k, spec.include_intercept)


def _group_indices(keys: list) -> list[np.ndarray]:
    groups: dict = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    return [np.asarray(rows) for rows in groups.values()]


def _demean(
    M: np.ndarray, factor_groups: list[list[np.ndarray]], w: Optional[np.ndarray]
) -> np.ndarray:
    """Project out group means for every factor, sweeping until stable."""
    out = M.astype(float, copy=True)
    if len(factor_groups) == 1:
        for rows in factor_groups[0]:
            if w is None:
                out[rows] -= out[rows].mean(axis=0)
            else:
                ww = w[rows]
                out[rows] -= (ww[:, None] * out[rows]).sum(axis=0) / ww.sum()
        return out
    for _ in range(10000):
        delta = 0.0
        for groups in factor_groups:
            for rows in groups:
                if w is None:
                    mean = out[rows].mean(axis=0)
                else:
                    ww = w[rows]
                    mean = (ww[:, None] * out[rows]).sum(axis=0) / ww.sum()
                out[rows] -= mean
                change = float(np.max(np.abs(mean))) if mean.size else 0.0
                delta = max(delta, change)
        if delta < DEMEAN_TOL:
            return out
    raise NoConvergenceError(10000)


def panel_ols(table: DataTable, spec: RegressionSpec) -> FitResult:
    """Fixed-effects regression by within-transformation.

    Group means of the outcome and every regressor are swept out for each
    fixed-effect factor (iterating until the largest adjustment falls below
    1e-10 when there are several factors).  Residual dof subtracts the
    absorbed levels — L₁ + Σ(Lᵢ − 1) for factors beyond the first — so
    covariance matches the dummy-saturated OLS regression exactly.
    """
    if not spec.fixed_effect_factors:
        raise ValueError("panel_ols needs at least one fixed_effect_factor")
    d = build_design(table, spec)
    n, k = d.X.shape
    if k == 0:
        raise EstimationError("no regressors to estimate after absorbing fixed effects")

    factor_groups = []
    absorbed = 0
    for name, values in zip(spec.fixed_effect_factors, d.factors):
        groups = _group_indices(values)
        if len(groups) < 2:
            raise DegenerateFactorError(name)
        factor_groups.append(groups)
        absorbed += len(groups) if not factor_groups[:-1] else len(groups) - 1

    dof_resid = n - k - absorbed
    if dof_resid < 1:
        raise TooFewRowsError(n, k + absorbed + 1)

    M = np.column_stack([d.y, d.X])
    Md = _demean(M, factor_groups, d.weights)
    yd, Xd = Md[:, 0], Md[:, 1:]

    scale = np.maximum(np.max(np.abs(d.X), axis=0), 1.0)
    dead = [d.names[j] for j in range(k) if np.max(np.abs(Xd[:, j])) <= 1e-10 * scale[j]]
    if dead:
        raise NoVariationAfterDemeaningError(dead)

    if d.weights is not None:
        sw = np.sqrt(d.weights)
        Xd = Xd * sw[:, None]
        yd = yd * sw

    beta, xtx_inv = solve_ls(Xd, yd, d.names)
    return _finish("panel_ols", d, Xd, yd, beta, xtx_inv, dof_resid, True)
