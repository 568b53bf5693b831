"""Sharp and fuzzy regression discontinuity via local polynomial fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BandwidthNonpositiveError,
    InsufficientSupportError,
    ZeroFirstStageError,
)
from .linear import p_two_sided, solve_ls
from .table import DataTable

KERNELS = ("triangular", "uniform")
FIRST_STAGE_FLOOR = 1e-6


@dataclass(frozen=True)
class RddResult:
    effect: float
    standard_error: float
    p_value: float
    bandwidth: float
    kernel: str
    order: int
    n_left: int
    n_right: int
    design: str
    notes: tuple[str, ...] = field(default_factory=tuple)


def _kernel_weights(x: np.ndarray, h: float, kernel: str) -> np.ndarray:
    if kernel == "triangular":
        return np.clip(1.0 - np.abs(x) / h, 0.0, None)
    return (np.abs(x) <= h).astype(float)


def _effect_p(effect: float, se: float) -> float:
    """Normal two-sided p; an exact-fit zero SE maps to 0 (or 1 at effect 0)."""
    if se > 0:
        stat = effect / se
    else:
        stat = np.nan if effect == 0 else np.inf
    return float(p_two_sided(np.array([stat]), None)[0])


def _side_fit(
    x: np.ndarray, Y: np.ndarray, w: np.ndarray, order: int, side: str
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted polynomial fit of each response column on one side.

    Returns the intercept estimates (one per response) and the HC0
    intercept covariance block across responses, so a fuzzy ratio can carry
    the outcome/treatment cross term.
    """
    usable = w > 0
    n = int(usable.sum())
    if n < order + 2:
        raise InsufficientSupportError(side, n, order + 2)
    x, Y, w = x[usable], Y[usable], w[usable]
    X = np.column_stack([x**p for p in range(order + 1)])
    sw = np.sqrt(w)
    names = [f"x^{p}" for p in range(order + 1)]
    beta, xtx_inv = solve_ls(X * sw[:, None], Y * sw[:, None], names)
    resid = Y - X @ beta

    m = Y.shape[1]
    cov0 = np.empty((m, m))
    bread = xtx_inv[0]  # first row of (XᵀWX)⁻¹ is all we need for intercepts
    for a in range(m):
        for b in range(m):
            meat = (X * (w**2 * resid[:, a] * resid[:, b])[:, None]).T @ X
            cov0[a, b] = float(bread @ meat @ bread)
    return beta[0], cov0


def _prepare(
    table: DataTable,
    columns: list[str],
    running: str,
    cutoff: float,
    bandwidth: Optional[float],
) -> tuple[np.ndarray, np.ndarray, float, list[str]]:
    mask = table.complete_mask(columns + [running])
    idx = np.flatnonzero(mask)
    x = table.column(running).numeric()[idx] - cutoff
    Y = table.numeric_matrix(columns)[idx]
    notes = []
    if bandwidth is None:
        sd = float(np.std(table.column(running).numeric()[idx], ddof=1))
        bandwidth = 1.84 * sd * idx.size ** (-1.0 / 5.0)
        notes.append(f"rule-of-thumb bandwidth: {bandwidth!r}")
    if bandwidth <= 0:
        raise BandwidthNonpositiveError(bandwidth)
    return x, Y, float(bandwidth), notes


def _jump(
    x: np.ndarray, Y: np.ndarray, h: float, kernel: str, order: int
) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Intercept jumps and their covariance across the cutoff."""
    left = x < 0
    w = _kernel_weights(x, h, kernel)
    wl, wr = w * left, w * ~left
    b_l, cov_l = _side_fit(x, Y, wl, order, "left")
    b_r, cov_r = _side_fit(x, Y, wr, order, "right")
    return b_r - b_l, cov_l + cov_r, int((wl > 0).sum()), int((wr > 0).sum())


def rdd_sharp(
    table: DataTable,
    outcome: str,
    running: str,
    cutoff: float,
    bandwidth: Optional[float] = None,
    kernel: str = "triangular",
    order: int = 1,
) -> RddResult:
    """Sharp RDD: intercept jump of a local polynomial at the cutoff.

    A polynomial of the given order is fitted separately on each side of
    the cutoff with kernel weights K(|x−c|/h); the effect is the difference
    of the side intercepts and its variance sums the per-side HC0 intercept
    variances.  Without an explicit bandwidth the rule of thumb
    1.84·sd(running)·n^(−1/5) is used and recorded in the notes.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel '{kernel}'")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    x, Y, h, notes = _prepare(table, [outcome], running, cutoff, bandwidth)
    jump, cov, n_left, n_right = _jump(x, Y, h, kernel, order)
    effect = float(jump[0])
    se = float(np.sqrt(max(cov[0, 0], 0.0)))
    p = _effect_p(effect, se)
    return RddResult(
        effect, se, p, h, kernel, order, n_left, n_right, "sharp", tuple(notes)
    )


def rdd_fuzzy(
    table: DataTable,
    outcome: str,
    treatment_received: str,
    running: str,
    cutoff: float,
    bandwidth: Optional[float] = None,
    kernel: str = "triangular",
    order: int = 1,
) -> RddResult:
    """Fuzzy RDD: outcome jump divided by the treatment-probability jump.

    Both jumps come from the same joint local fit, and the delta-method
    standard error keeps the cross-covariance between them.  A treatment
    jump below 1e-6 in magnitude leaves the design unidentified.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel '{kernel}'")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    x, Y, h, notes = _prepare(
        table, [outcome, treatment_received], running, cutoff, bandwidth
    )
    jump, cov, n_left, n_right = _jump(x, Y, h, kernel, order)
    num, den = float(jump[0]), float(jump[1])
    if abs(den) < FIRST_STAGE_FLOOR:
        raise ZeroFirstStageError(den)
    effect = num / den
    grad = np.array([1.0 / den, -num / den**2])
    var = float(grad @ cov @ grad)
    se = float(np.sqrt(max(var, 0.0)))
    p = _effect_p(effect, se)
    notes.append(f"first-stage jump: {den!r}")
    return RddResult(
        effect, se, p, h, kernel, order, n_left, n_right, "fuzzy", tuple(notes)
    )
