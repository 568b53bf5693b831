"""Propensity-score oracles: exhaustive matching, trim arithmetic, composition."""

from __future__ import annotations

import numpy as np
import pytest

from econagent.errors import (
    AllTrimmedError,
    EmptyGroupError,
    NoConvergenceError,
    SeparationError,
)
from econagent.linear import ols
from econagent.propensity import (
    SCORE_COLUMN,
    TrimRule,
    estimate_propensity_scores,
    ps_matching,
    ps_regression_adjustment,
    trim_by_score,
)
from econagent.results import RegressionSpec, VcovSpec
from econagent.table import Column

from conftest import build_table


# ---------------------------------------------------------------------------
# exhaustive matching oracle
# ---------------------------------------------------------------------------


def exhaustive_estimate(scores, treated, y, estimand):
    """Brute-force nearest-neighbor match, ties to the lowest row index."""
    t_idx = np.flatnonzero(treated)
    c_idx = np.flatnonzero(~treated)

    def nearest(i, pool):
        d = np.abs(scores[pool] - scores[i])
        return int(pool[d == d.min()].min())

    t_diffs = [y[i] - y[nearest(i, c_idx)] for i in t_idx]
    if estimand == "ATET":
        return float(np.mean(t_diffs))
    c_diffs = [y[nearest(j, t_idx)] - y[j] for j in c_idx]
    return float(np.mean(t_diffs + c_diffs))


def _random_table(rng, n):
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    n_t = int(rng.integers(3, n - 3))
    t = np.zeros(n)
    t[rng.permutation(n)[:n_t]] = 1.0
    y = 2.0 * t + x1 - x2 + rng.normal(size=n)
    return build_table(
        {
            "t": ("real", list(t)),
            "y": ("real", list(y)),
            "x1": ("real", list(x1)),
            "x2": ("real", list(x2)),
        }
    )


@pytest.mark.parametrize("estimand", ["ATET", "ATE"])
def test_matching_equals_exhaustive_oracle(estimand):
    rng = np.random.default_rng(71)
    done = 0
    for _ in range(60):
        n = int(rng.integers(10, 51))
        table = _random_table(rng, n)
        try:
            result = ps_matching(
                table, "t", "y", ["x1", "x2"], estimand=estimand
            )
        except (SeparationError, NoConvergenceError):
            continue
        scores, _ = estimate_propensity_scores(table, "t", ["x1", "x2"])
        arr = np.array([float(s) for s in scores])
        treated = table.column("t").numeric() > 0.5
        y = table.column("y").numeric()
        oracle = exhaustive_estimate(arr, treated, y, estimand)
        assert result.point_estimate == oracle
        done += 1
    assert done >= 40


def test_tie_broken_by_lowest_index():
    # controls 2 and 3 share identical covariates, hence identical scores
    table = build_table(
        {
            "t": ("real", [1.0, 1.0, 0.0, 0.0, 0.0]),
            "y": ("real", [5.0, 6.0, 1.0, 9.0, 2.0]),
            "x": ("real", [0.2, 0.4, 0.3, 0.3, -1.5]),
        }
    )
    result = ps_matching(table, "t", "y", ["x"], estimand="ATET")
    partners = {m[1] for m in result.matches}
    assert 2 in partners and 3 not in partners


def test_without_replacement_uses_each_control_once():
    rng = np.random.default_rng(72)
    n = 30
    table = _random_table(rng, n)
    result = ps_matching(
        table, "t", "y", ["x1", "x2"], estimand="ATET", with_replacement=False
    )
    partners = [m[1] for m in result.matches]
    assert len(partners) == len(set(partners))


def test_with_replacement_can_reuse_a_control():
    table = build_table(
        {
            "t": ("real", [1.0, 1.0, 1.0, 0.0, 0.0]),
            "y": ("real", [4.0, 5.0, 6.0, 1.0, 2.0]),
            "x": ("real", [0.1, 0.2, 0.3, 0.15, -3.0]),
        }
    )
    result = ps_matching(table, "t", "y", ["x"], estimand="ATET")
    partners = [m[1] for m in result.matches]
    assert len(set(partners)) < len(partners)


def test_ratio_two_averages_nearest_pair():
    rng = np.random.default_rng(73)
    table = _random_table(rng, 24)
    result = ps_matching(table, "t", "y", ["x1", "x2"], estimand="ATET", ratio=2)
    scores, _ = estimate_propensity_scores(table, "t", ["x1", "x2"])
    arr = np.array([float(s) for s in scores])
    treated = table.column("t").numeric() > 0.5
    y = table.column("y").numeric()
    t_idx = np.flatnonzero(treated)
    c_idx = np.flatnonzero(~treated)
    diffs = []
    for i in t_idx:
        d = np.abs(arr[c_idx] - arr[i])
        order = np.lexsort((c_idx, d))[:2]
        diffs.append(y[i] - np.mean(y[c_idx[order]]))
    assert np.isclose(result.point_estimate, np.mean(diffs), rtol=1e-12)


def test_bootstrap_se_is_seed_deterministic():
    rng = np.random.default_rng(74)
    table = _random_table(rng, 40)
    a = ps_matching(table, "t", "y", ["x1", "x2"], bootstrap_reps=20, seed=7)
    b = ps_matching(table, "t", "y", ["x1", "x2"], bootstrap_reps=20, seed=7)
    c = ps_matching(table, "t", "y", ["x1", "x2"], bootstrap_reps=20, seed=8)
    assert a.bootstrap_se == b.bootstrap_se
    assert a.bootstrap_se is not None and a.bootstrap_se > 0
    assert a.bootstrap_se != c.bootstrap_se


def test_matching_survives_affine_covariate_transform():
    rng = np.random.default_rng(75)
    table = _random_table(rng, 40)
    shifted = table.replace_column(
        Column(
            "x1",
            "real",
            tuple(10.0 + 3.0 * float(v) for v in table.column("x1").values),
        )
    )
    a = ps_matching(table, "t", "y", ["x1", "x2"], estimand="ATE")
    b = ps_matching(shifted, "t", "y", ["x1", "x2"], estimand="ATE")
    assert [(m[0], m[1]) for m in a.matches] == [(m[0], m[1]) for m in b.matches]
    assert a.point_estimate == b.point_estimate


def test_missing_covariate_rows_dropped_with_original_indices():
    table = build_table(
        {
            "t": ("real", [1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            "y": ("real", [4.0, 1.0, 5.0, 2.0, 1.5, 6.0]),
            "x": ("real", [0.5, None, 0.2, -0.1, 0.3, 0.7]),
        }
    )
    result = ps_matching(table, "t", "y", ["x"], estimand="ATET")
    used = {i for m in result.matches for i in m[:2]}
    assert 1 not in used
    assert any("dropped 1" in n for n in result.notes)


def test_no_controls_raises():
    # a one-level treatment makes the score model itself degenerate, so
    # either the separation guard or the empty-group check may fire first
    table = build_table(
        {
            "t": ("real", [1.0, 1.0, 1.0, 1.0]),
            "y": ("real", [1.0, 2.0, 3.0, 4.0]),
            "x": ("real", [0.1, 0.4, -0.2, 0.9]),
        }
    )
    with pytest.raises((EmptyGroupError, SeparationError)):
        ps_matching(table, "t", "y", ["x"])


# ---------------------------------------------------------------------------
# trimming
# ---------------------------------------------------------------------------


def test_quantile_trim_keeps_strictly_between():
    scores = list(np.linspace(0.005, 0.995, 100))
    keep = trim_by_score(scores, TrimRule("quantile", 0.1, 0.9))
    assert int(keep.sum()) == 80
    order = np.argsort(scores)
    kept_sorted = keep[order]
    assert not kept_sorted[:10].any() and not kept_sorted[-10:].any()


def test_threshold_trim_is_closed():
    scores = [0.1, 0.3, 0.5, 0.9]
    keep = trim_by_score(scores, TrimRule("threshold", 0.3, 0.9))
    assert list(keep) == [False, True, True, True]


def test_missing_scores_never_kept():
    keep = trim_by_score([None, 0.5, 0.6], TrimRule("threshold", 0.0, 1.0))
    assert list(keep) == [False, True, True]


def test_all_trimmed_raises():
    with pytest.raises(AllTrimmedError):
        trim_by_score([0.1, 0.9], TrimRule("threshold", 0.45, 0.55))
    with pytest.raises(AllTrimmedError):
        trim_by_score([None, None], TrimRule("quantile", 0.0, 1.0))


def test_trim_rule_validation():
    with pytest.raises(ValueError):
        TrimRule("quantile", 0.6, 0.9)
    with pytest.raises(ValueError):
        TrimRule("quantile", 0.1, 0.4)
    with pytest.raises(ValueError):
        TrimRule("percentile", 0.1, 0.9)


# ---------------------------------------------------------------------------
# regression adjustment as an explicit composition
# ---------------------------------------------------------------------------


def test_regression_adjustment_equals_manual_composition():
    rng = np.random.default_rng(76)
    n = 200
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    p = 1 / (1 + np.exp(-(0.3 * x1 - 0.4 * x2)))
    t = (rng.uniform(size=n) < p).astype(float)
    y = 3.0 * t + x1 + 0.5 * x2 + rng.normal(size=n)
    table = build_table(
        {
            "t": ("real", list(t)),
            "y": ("real", list(y)),
            "x1": ("real", list(x1)),
            "x2": ("real", list(x2)),
        }
    )
    rule = TrimRule("quantile", 0.1, 0.9)
    fit = ps_regression_adjustment(table, "t", "y", ["x1", "x2"], trim=rule)

    scores, _ = estimate_propensity_scores(table, "t", ["x1", "x2"])
    keep = trim_by_score(scores, rule)
    with_score = table.with_column(Column(SCORE_COLUMN, "real", tuple(scores)))
    manual = ols(
        with_score.select_rows(keep),
        RegressionSpec(outcome="y", regressors=("t", SCORE_COLUMN)),
    )
    assert fit.coefficients == manual.coefficients
    assert fit.standard_errors == manual.standard_errors
    assert fit.p_values == manual.p_values
    assert fit.method == "ps_regression_adjustment"
    assert any("trim kept" in n for n in fit.notes)


def test_regression_adjustment_second_stage_covariates_and_vcov():
    rng = np.random.default_rng(77)
    n = 150
    x = rng.normal(size=n)
    t = (rng.uniform(size=n) < 0.5).astype(float)
    y = 2.0 * t + x + rng.normal(size=n)
    table = build_table(
        {"t": ("real", list(t)), "y": ("real", list(y)), "x": ("real", list(x))}
    )
    fit = ps_regression_adjustment(
        table,
        "t",
        "y",
        ["x"],
        include_covariates_second_stage=True,
        vcov=VcovSpec.hc1(),
    )
    assert "x" in fit.coefficient_names
    scores, _ = estimate_propensity_scores(table, "t", ["x"])
    with_score = table.with_column(Column(SCORE_COLUMN, "real", tuple(scores)))
    manual = ols(
        with_score,
        RegressionSpec(
            outcome="y", regressors=("t", SCORE_COLUMN, "x"), vcov=VcovSpec.hc1()
        ),
    )
    assert fit.standard_errors == manual.standard_errors


def test_categorical_covariates_are_dummy_encoded():
    rng = np.random.default_rng(78)
    n = 120
    race = [int(v) for v in rng.integers(1, 4, size=n)]
    x = rng.normal(size=n)
    t = (rng.uniform(size=n) < 0.5).astype(float)
    y = 1.0 * t + x + rng.normal(size=n)
    table = build_table(
        {
            "t": ("real", list(t)),
            "y": ("real", list(y)),
            "x": ("real", list(x)),
            "race": ("integer", race),
        }
    )
    result = ps_matching(table, "t", "y", ["x", "race"], categorical=["race"])
    names = result.model.coefficient_names
    assert any(name.startswith("race__") for name in names)
    assert "race" not in names
    with pytest.raises(ValueError):
        ps_matching(table, "t", "y", ["x"], categorical=["race"])
