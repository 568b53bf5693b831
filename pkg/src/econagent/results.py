"""Shared result and specification types for the estimators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import UnknownColumnError


@dataclass(frozen=True)
class VcovSpec:
    """Covariance estimator choice.

    ``classical`` is the homoskedastic s²(XᵀX)⁻¹; ``robust_hc1`` the
    heteroskedasticity-consistent sandwich with n/(n−k) scaling; ``cluster``
    the cluster-robust sandwich with the G/(G−1)·(n−1)/(n−k) small-sample
    factor and a t reference distribution with G−1 degrees of freedom.
    """

    kind: str = "classical"
    cluster_column: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("classical", "robust_hc1", "cluster"):
            raise ValueError(f"unknown vcov kind '{self.kind}'")
        if (self.kind == "cluster") != (self.cluster_column is not None):
            raise ValueError("cluster_column is required exactly when kind='cluster'")

    @staticmethod
    def classical() -> "VcovSpec":
        return VcovSpec("classical")

    @staticmethod
    def hc1() -> "VcovSpec":
        return VcovSpec("robust_hc1")

    @staticmethod
    def cluster(column: str) -> "VcovSpec":
        return VcovSpec("cluster", column)


@dataclass(frozen=True)
class RegressionSpec:
    """What to regress on what, and how to compute the covariance."""

    outcome: str
    regressors: tuple[str, ...]
    include_intercept: bool = True
    fixed_effect_factors: tuple[str, ...] = field(default_factory=tuple)
    vcov: VcovSpec = field(default_factory=VcovSpec)
    weights: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fixed_effect_factors", tuple(self.fixed_effect_factors))
        if self.outcome in self.regressors:
            raise ValueError(f"outcome '{self.outcome}' also listed as regressor")
        overlap = set(self.regressors) & set(self.fixed_effect_factors)
        if overlap:
            raise ValueError(f"columns both regressor and fixed effect: {sorted(overlap)}")


@dataclass(frozen=True)
class FitResult:
    """Coefficients plus covariance and the usual per-coefficient statistics.

    ``covariance`` is stored as a nested tuple so results hash and compare
    by value; :meth:`cov_matrix` gives the numpy view.
    """

    method: str
    coefficient_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    covariance: tuple[tuple[float, ...], ...]
    standard_errors: tuple[float, ...]
    p_values: tuple[float, ...]
    n_obs: int
    dof_resid: int
    r_squared: Optional[float] = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        k = len(self.coefficient_names)
        for name, seq in (
            ("coefficients", self.coefficients),
            ("standard_errors", self.standard_errors),
            ("p_values", self.p_values),
            ("covariance", self.covariance),
        ):
            if len(seq) != k:
                raise ValueError(f"{name} length {len(seq)} != {k} names")

    def cov_matrix(self) -> np.ndarray:
        return np.array(self.covariance, dtype=float)

    def index_of(self, name: str) -> int:
        try:
            return self.coefficient_names.index(name)
        except ValueError:
            raise UnknownColumnError(name) from None

    def row(self, name: str) -> tuple[float, float, float]:
        """(coefficient, standard error, p-value) for one coefficient."""
        i = self.index_of(name)
        return self.coefficients[i], self.standard_errors[i], self.p_values[i]

    def to_json_obj(self) -> dict:
        return {
            "method": self.method,
            "coefficient_names": list(self.coefficient_names),
            "coefficients": list(self.coefficients),
            "covariance": [list(r) for r in self.covariance],
            "standard_errors": list(self.standard_errors),
            "p_values": list(self.p_values),
            "n_obs": self.n_obs,
            "dof_resid": self.dof_resid,
            "r_squared": self.r_squared,
            "notes": list(self.notes),
        }

    def render_text(self) -> str:
        width = max((len(n) for n in self.coefficient_names), default=4)
        lines = [f"{self.method}: n={self.n_obs}, dof={self.dof_resid}"]
        lines.append(f"{'term'.ljust(width)}  {'coef':>14}  {'se':>12}  {'p':>10}")
        for name, b, se, p in zip(
            self.coefficient_names, self.coefficients, self.standard_errors, self.p_values
        ):
            lines.append(f"{name.ljust(width)}  {b:14.6g}  {se:12.6g}  {p:10.4g}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def make_fit_result(
    method: str,
    names: Sequence[str],
    coefficients: np.ndarray,
    covariance: np.ndarray,
    p_values: np.ndarray,
    n_obs: int,
    dof_resid: int,
    r_squared: Optional[float] = None,
    notes: Sequence[str] = (),
) -> FitResult:
    """Package estimator output, symmetrizing the covariance first."""
    cov = np.asarray(covariance, dtype=float)
    cov = (cov + cov.T) / 2.0
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        method=method,
        coefficient_names=tuple(names),
        coefficients=tuple(float(b) for b in np.asarray(coefficients, dtype=float)),
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
        standard_errors=tuple(float(s) for s in ses),
        p_values=tuple(float(p) for p in np.asarray(p_values, dtype=float)),
        n_obs=int(n_obs),
        dof_resid=int(dof_resid),
        r_squared=None if r_squared is None else float(r_squared),
        notes=tuple(notes),
    )
