"""Logistic regression via iteratively reweighted least squares."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import (
    NoConvergenceError,
    NonBinaryOutcomeError,
    SeparationError,
    TooFewRowsError,
)
from .linear import INTERCEPT, build_design, p_two_sided, solve_ls
from .results import FitResult, RegressionSpec, make_fit_result
from .table import DataTable

#: coefficient magnitude beyond which the likelihood is effectively flat and
#: the data are treated as perfectly separated
SEPARATION_BOUND = 30.0


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logit_fit(
    table: DataTable,
    spec: RegressionSpec,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> FitResult:
    """Maximum-likelihood logistic fit.

    Each IRLS step solves the working weighted least-squares problem with
    weights p(1−p); convergence is declared when the largest coefficient
    change falls below ``tol``.  The covariance is the inverse observed
    information (XᵀWX)⁻¹ and p-values use the normal distribution.  A
    coefficient escaping past ±30 during iteration is read as perfect
    separation.
    """
    if spec.fixed_effect_factors:
        raise ValueError("logit_fit does not absorb fixed effects")
    d = build_design(table, spec)
    n, k = d.X.shape
    if n < k + 1:
        raise TooFewRowsError(n, k + 1)
    y = d.y
    uniq = set(np.unique(y))
    if not uniq <= {0.0, 1.0}:
        raise NonBinaryOutcomeError(spec.outcome)

    freq = d.weights if d.weights is not None else np.ones(n)
    X = d.X
    beta = np.zeros(k)
    for _ in range(max_iter):
        p = sigmoid(X @ beta)
        w = freq * p * (1.0 - p)
        w = np.maximum(w, 1e-12)
        sw = np.sqrt(w)
        z = X @ beta + (y - p) / w * freq
        beta_new, _ = solve_ls(X * sw[:, None], z * sw, d.names)
        step = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise SeparationError()
        if step < tol:
            break
    else:
        raise NoConvergenceError(max_iter)

    p = sigmoid(X @ beta)
    w = np.maximum(freq * p * (1.0 - p), 1e-12)
    info = (X * w[:, None]).T @ X
    cov = np.linalg.inv(info)
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        zstats = beta / ses
    pvals = p_two_sided(zstats, None)

    notes = []
    if d.n_dropped:
        notes.append(f"dropped {d.n_dropped} row(s) with missing values")
    return make_fit_result(
        "logit", d.names, beta, cov, pvals, n, n - k, None, notes
    )


def predict_proba(fit: FitResult, table: DataTable) -> list[Optional[float]]:
    """Fitted probabilities for each row; rows missing a regressor get None."""
    cols = []
    for name in fit.coefficient_names:
        if name == INTERCEPT:
            cols.append(None)
        else:
            cols.append(table.column(name))
    beta = np.asarray(fit.coefficients)
    out: list[Optional[float]] = []
    for i in range(table.n_rows):
        z = 0.0
        ok = True
        for b, col in zip(beta, cols):
            if col is None:
                z += b
                continue
            v = col.values[i]
            if v is None:
                ok = False
                break
            z += b * float(v)
        out.append(float(sigmoid(np.array([z]))[0]) if ok else None)
    return out


def log_likelihood(fit: FitResult, table: DataTable, outcome: str) -> float:
    """Bernoulli log-likelihood of the fitted model on complete rows."""
    probs = predict_proba(fit, table)
    ycol = table.column(outcome)
    ll = 0.0
    for p, yv in zip(probs, ycol.values):
        if p is None or yv is None:
            continue
        p = min(max(p, 1e-300), 1 - 1e-16)
        ll += float(yv) * np.log(p) + (1.0 - float(yv)) * np.log(1.0 - p)
    return ll
