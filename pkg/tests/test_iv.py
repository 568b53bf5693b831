"""Two-stage least squares against the just-identified closed form."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from econagent.errors import UnderIdentifiedError
from econagent.iv import iv_2sls
from econagent.results import VcovSpec

from conftest import build_table


def _iv_table(rng, n=400, beta=1.5, pi=0.8):
    z = rng.normal(size=n)
    conf = rng.normal(size=n)
    d = pi * z + 0.9 * conf + rng.normal(size=n) * 0.5
    y = beta * d + 1.2 * conf + rng.normal(size=n) * 0.5
    return (
        build_table(
            {"y": ("real", list(y)), "d": ("real", list(d)), "z": ("real", list(z))}
        ),
        z,
        d,
        y,
    )


def test_just_identified_closed_form():
    rng = np.random.default_rng(61)
    for _ in range(25):
        n = int(rng.integers(30, 120))
        table, z, d, y = _iv_table(rng, n=n)
        fit = iv_2sls(table, "y", ["d"], ["z"])
        Zd = np.column_stack([np.ones(n), z])
        Xd = np.column_stack([np.ones(n), d])
        oracle = np.linalg.solve(Zd.T @ Xd, Zd.T @ y)
        got = np.array(fit.coefficients)
        assert np.allclose(got, oracle, rtol=1e-10, atol=1e-12)


def test_dgp_recovery_and_structural_residual_se():
    rng = np.random.default_rng(62)
    table, z, d, y = _iv_table(rng, n=4000, beta=1.5)
    fit = iv_2sls(table, "y", ["d"], ["z"])
    c, se, p = fit.row("d")
    assert abs(c - 1.5) < 3 * se
    # classical covariance built from structural residuals
    n = len(y)
    Zd = np.column_stack([np.ones(n), z])
    Xd = np.column_stack([np.ones(n), d])
    beta = np.linalg.solve(Zd.T @ Xd, Zd.T @ y)
    first = np.linalg.solve(Zd.T @ Zd, Zd.T @ Xd)
    X_hat = Zd @ first
    u = y - Xd @ beta
    s2 = u @ u / (n - 2)
    cov = s2 * np.linalg.inv(X_hat.T @ X_hat)
    assert np.allclose(fit.cov_matrix(), cov, rtol=1e-9)


def test_exogenous_controls_enter_both_stages():
    rng = np.random.default_rng(63)
    n = 500
    z = rng.normal(size=n)
    w = rng.normal(size=n)
    d = 0.8 * z + 0.5 * w + rng.normal(size=n) * 0.4
    y = 2.0 * d - 1.0 * w + rng.normal(size=n) * 0.4
    table = build_table(
        {
            "y": ("real", list(y)),
            "d": ("real", list(d)),
            "z": ("real", list(z)),
            "w": ("real", list(w)),
        }
    )
    fit = iv_2sls(table, "y", ["d"], ["z"], exogenous=["w"])
    Zd = np.column_stack([np.ones(n), w, z])
    Xd = np.column_stack([np.ones(n), d, w])
    first = np.linalg.lstsq(Zd, Xd, rcond=None)[0]
    X_hat = Zd @ first
    oracle = np.linalg.lstsq(X_hat, y, rcond=None)[0]
    assert np.allclose(fit.coefficients, oracle, rtol=1e-9)
    assert fit.coefficient_names == ("const", "d", "w")


def test_first_stage_partial_f_matches_hand_value():
    rng = np.random.default_rng(64)
    n = 300
    z = rng.normal(size=n)
    d = 0.6 * z + rng.normal(size=n)
    y = d + rng.normal(size=n)
    table = build_table(
        {"y": ("real", list(y)), "d": ("real", list(d)), "z": ("real", list(z))}
    )
    fit = iv_2sls(table, "y", ["d"], ["z"])
    Zd = np.column_stack([np.ones(n), z])
    bu = np.linalg.lstsq(Zd, d, rcond=None)[0]
    ssr_u = np.sum((d - Zd @ bu) ** 2)
    ssr_r = np.sum((d - d.mean()) ** 2)
    f = ((ssr_r - ssr_u) / 1) / (ssr_u / (n - 2))
    note = next(nt for nt in fit.notes if "partial F" in nt)
    assert f"{f:.4f}" in note


def test_weak_instrument_note():
    rng = np.random.default_rng(65)
    n = 200
    z = rng.normal(size=n)
    d = 0.02 * z + rng.normal(size=n)
    y = d + rng.normal(size=n)
    table = build_table(
        {"y": ("real", list(y)), "d": ("real", list(d)), "z": ("real", list(z))}
    )
    fit = iv_2sls(table, "y", ["d"], ["z"])
    assert any("weak instrument" in nt for nt in fit.notes)


def test_strong_instrument_no_warning():
    rng = np.random.default_rng(66)
    table, *_ = _iv_table(rng, n=1000, pi=1.0)
    fit = iv_2sls(table, "y", ["d"], ["z"])
    assert not any("weak instrument" in nt for nt in fit.notes)


def test_under_identified_rejected():
    table = build_table(
        {
            "y": ("real", [1.0, 2.0, 3.0, 4.0]),
            "d1": ("real", [1.0, 0.0, 1.0, 0.0]),
            "d2": ("real", [0.5, 1.5, 0.5, 1.5]),
            "z": ("real", [1.0, 2.0, 1.0, 2.0]),
        }
    )
    with pytest.raises(UnderIdentifiedError):
        iv_2sls(table, "y", ["d1", "d2"], ["z"])


def test_overidentified_matches_projection_formula():
    rng = np.random.default_rng(67)
    n = 600
    z1 = rng.normal(size=n)
    z2 = rng.normal(size=n)
    d = 0.5 * z1 + 0.4 * z2 + rng.normal(size=n)
    y = 1.5 * d + rng.normal(size=n)
    table = build_table(
        {
            "y": ("real", list(y)),
            "d": ("real", list(d)),
            "z1": ("real", list(z1)),
            "z2": ("real", list(z2)),
        }
    )
    fit = iv_2sls(table, "y", ["d"], ["z1", "z2"])
    Zd = np.column_stack([np.ones(n), z1, z2])
    Xd = np.column_stack([np.ones(n), d])
    P = Zd @ np.linalg.inv(Zd.T @ Zd) @ Zd.T
    oracle = np.linalg.solve(Xd.T @ P @ Xd, Xd.T @ P @ y)
    assert np.allclose(fit.coefficients, oracle, rtol=1e-9)


def test_cluster_vcov_uses_t_with_g_minus_1():
    rng = np.random.default_rng(68)
    n = 80
    g = np.repeat(np.arange(8), 10)
    z = rng.normal(size=n)
    d = 0.9 * z + rng.normal(size=n)
    y = 1.5 * d + rng.normal(size=n)
    table = build_table(
        {
            "y": ("real", list(y)),
            "d": ("real", list(d)),
            "z": ("real", list(z)),
            "g": ("integer", [int(v) for v in g]),
        }
    )
    fit = iv_2sls(table, "y", ["d"], ["z"], vcov=VcovSpec.cluster("g"))
    c, se, p = fit.row("d")
    assert np.isclose(p, 2 * stats.t.sf(abs(c / se), 7), rtol=1e-10)
