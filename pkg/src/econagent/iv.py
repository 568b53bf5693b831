"""Two-stage least squares with instrument diagnostics."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import TooFewRowsError, UnderIdentifiedError
from .linear import INTERCEPT, p_two_sided, sandwich_covariance, solve_ls
from .results import FitResult, VcovSpec, make_fit_result
from .table import DataTable


def _partial_f(
    endog: np.ndarray, Z: np.ndarray, Z_restricted: np.ndarray, q: int
) -> float:
    """First-stage partial F of the excluded instruments for one regressor."""
    b_u, _ = solve_ls(Z, endog, [f"z{i}" for i in range(Z.shape[1])])
    ssr_u = float(np.sum((endog - Z @ b_u) ** 2))
    b_r, _ = solve_ls(Z_restricted, endog, [f"r{i}" for i in range(Z_restricted.shape[1])])
    ssr_r = float(np.sum((endog - Z_restricted @ b_r) ** 2))
    dof = endog.size - Z.shape[1]
    if dof <= 0 or ssr_u <= 0:
        return float("inf")
    return ((ssr_r - ssr_u) / q) / (ssr_u / dof)


def iv_2sls(
    table: DataTable,
    outcome: str,
    endogenous: Sequence[str],
    instruments: Sequence[str],
    exogenous: Sequence[str] = (),
    vcov: Optional[VcovSpec] = None,
) -> FitResult:
    """Instrumental-variables estimation by two-stage least squares.

    The structural regressors are projected onto the instrument set (which
    always contains the exogenous controls and an intercept), the outcome is
    regressed on the projections, and the covariance is built from the
    structural residuals y − Xβ̂ rather than the second-stage fitted
    residuals.  Each endogenous regressor's first-stage partial F statistic
    is recorded in the notes; F below 10 adds a weak-instrument warning.
    """
    vcov = vcov or VcovSpec()
    endogenous = list(endogenous)
    instruments = list(instruments)
    exogenous = list(exogenous)
    if len(instruments) < len(endogenous):
        raise UnderIdentifiedError(len(endogenous), len(instruments))

    needed = [outcome, *endogenous, *instruments, *exogenous]
    if vcov.cluster_column:
        needed.append(vcov.cluster_column)
    mask = table.complete_mask(needed)
    idx = np.flatnonzero(mask)
    n = idx.size
    n_dropped = table.n_rows - n

    y = table.column(outcome).numeric()[idx]
    ones = np.ones((n, 1))
    X_endog = table.numeric_matrix(endogenous)[idx]
    X_exog = table.numeric_matrix(exogenous)[idx]
    Z_inst = table.numeric_matrix(instruments)[idx]

    names = [INTERCEPT, *endogenous, *exogenous]
    X = np.hstack([ones, X_endog, X_exog])
    Z = np.hstack([ones, X_exog, Z_inst])
    Z_restricted = np.hstack([ones, X_exog])
    k = X.shape[1]
    if n < k + 1:
        raise TooFewRowsError(n, k + 1)

    # first stage: project every structural column onto the instrument set
    z_names = [INTERCEPT, *exogenous, *instruments]
    first, _ = solve_ls(Z, X, z_names)
    X_hat = Z @ first

    beta, xtx_inv = solve_ls(X_hat, y, names)
    resid = y - X @ beta

    cluster_ids = None
    if vcov.cluster_column:
        vals = table.column(vcov.cluster_column).values
        cluster_ids = [vals[i] for i in idx]
    cov, p_dof = sandwich_covariance(X_hat, resid, xtx_inv, vcov.kind, cluster_ids, n - k)
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstats = beta / ses
    pvals = p_two_sided(tstats, p_dof)

    notes = []
    q = len(instruments)
    for j, name in enumerate(endogenous):
        f = _partial_f(X_endog[:, j], Z, Z_restricted, q)
        notes.append(f"first-stage partial F ({name}): {f:.4f}")
        if f < 10:
            notes.append(f"weak instrument warning: first-stage F for {name} is {f:.4f} < 10")
    if n_dropped:
        notes.append(f"dropped {n_dropped} row(s) with missing values")

    ssr = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = None if sst <= 0 else 1.0 - ssr / sst
    return make_fit_result("iv_2sls", names, beta, cov, pvals, n, n - k, r2, notes)
