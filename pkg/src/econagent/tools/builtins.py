"""The built-in tool set: estimators plus data-preparation utilities.

Each tool binds a manual (``prompts/<name>.md``), a flat JSON parameter
schema, and a handler mapping validated arguments onto the corresponding
library call.  Handlers receive the session's named-table store and return
a result object; table-valued results are written back to the store by the
caller, never in here.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..did import did_event_study, did_static
from ..errors import EconAgentError
from ..iv import iv_2sls
from ..linear import ols, panel_ols
from ..logit import logit_fit
from ..propensity import TrimRule, ps_matching, ps_regression_adjustment
from ..results import RegressionSpec, VcovSpec
from ..summary import describe
from ..table import DataTable
from ..transforms import derive_column, median_split, one_hot_encode
from .descriptor import ToolDescriptor
from .registry import ToolRegistry, register_tool
from .schema import Parameter as P


@lru_cache(maxsize=None)
def load_manual(name: str) -> str:
    return (resources.files(__package__) / "prompts" / f"{name}.md").read_text(
        encoding="utf-8"
    )


def get_table(store: dict, name: str) -> DataTable:
    if name not in store:
        known = ", ".join(sorted(store)) or "(none)"
        raise EconAgentError(f"unknown table '{name}'; loaded tables: {known}")
    return store[name]


# -- shared parameter fragments ----------------------------------------------

_TABLE = P("table", "string", required=True, description="name of the loaded table")
_VCOV = (
    P(
        "vcov",
        "enum",
        default="classical",
        values=("classical", "robust_hc1", "cluster"),
        description="covariance estimator",
    ),
    P(
        "cluster_column",
        "string",
        description="column to cluster standard errors by (required when vcov='cluster')",
    ),
)


def _vcov_from(args: dict, default_cluster: str | None = None) -> VcovSpec:
    kind = args["vcov"]
    col = args.get("cluster_column")
    if kind == "cluster" and col is None:
        col = default_cluster
        if col is None:
            raise EconAgentError("vcov 'cluster' needs a cluster_column")
    if kind != "cluster" and col is not None:
        raise EconAgentError("cluster_column given but vcov is not 'cluster'")
    return VcovSpec(kind, col if kind == "cluster" else None)


def _trim_from(args: dict) -> TrimRule | None:
    if args["trim_mode"] == "none":
        return None
    return TrimRule(args["trim_mode"], args["trim_lower"], args["trim_upper"])


# -- handlers ------------------------------------------------------------------


def _h_ols(store, a):
    spec = RegressionSpec(
        outcome=a["outcome"],
        regressors=tuple(a["regressors"]),
        include_intercept=a["include_intercept"],
        vcov=_vcov_from(a),
        weights=a["weights"],
    )
    return ols(get_table(store, a["table"]), spec)


def _h_panel_ols(store, a):
    spec = RegressionSpec(
        outcome=a["outcome"],
        regressors=tuple(a["regressors"]),
        fixed_effect_factors=tuple(a["fixed_effects"]),
        vcov=_vcov_from(a),
        weights=a["weights"],
    )
    return panel_ols(get_table(store, a["table"]), spec)


def _h_logit(store, a):
    spec = RegressionSpec(
        outcome=a["outcome"],
        regressors=tuple(a["regressors"]),
        include_intercept=a["include_intercept"],
    )
    return logit_fit(get_table(store, a["table"]), spec, a["max_iter"], a["tol"])


def _h_iv(store, a):
    return iv_2sls(
        get_table(store, a["table"]),
        outcome=a["outcome"],
        endogenous=a["endogenous"],
        instruments=a["instruments"],
        exogenous=a["exogenous"],
        vcov=_vcov_from(a),
    )


def _h_ps_adjust(store, a):
    return ps_regression_adjustment(
        get_table(store, a["table"]),
        treatment=a["treatment"],
        outcome=a["outcome"],
        covariates=a["covariates"],
        categorical=a["categorical"],
        trim=_trim_from(a),
        include_covariates_second_stage=a["include_covariates_second_stage"],
        vcov=_vcov_from(a),
    )


def _h_ps_match(store, a):
    return ps_matching(
        get_table(store, a["table"]),
        treatment=a["treatment"],
        outcome=a["outcome"],
        covariates=a["covariates"],
        categorical=a["categorical"],
        estimand=a["estimand"],
        ratio=a["ratio"],
        with_replacement=a["with_replacement"],
        bootstrap_reps=a["bootstrap_reps"],
        seed=a["seed"],
    )


def _h_did_static(store, a):
    return did_static(
        get_table(store, a["table"]),
        outcome=a["outcome"],
        treatment_indicator=a["treatment"],
        unit=a["unit"],
        time=a["time"],
        controls=a["controls"],
        vcov=_vcov_from(a, default_cluster=a["unit"]),
    )


def _h_event_study(store, a):
    return did_event_study(
        get_table(store, a["table"]),
        outcome=a["outcome"],
        unit=a["unit"],
        time=a["time"],
        adoption_time=a["adoption_time"],
        see_back=a["see_back"],
        see_forward=a["see_forward"],
        controls=a["controls"],
        vcov=_vcov_from(a, default_cluster=a["unit"]),
        lag_indexing=a["lag_indexing"],
    )


def _h_rdd_sharp(store, a):
    return rdd_call(store, a, fuzzy=False)


def _h_rdd_fuzzy(store, a):
    return rdd_call(store, a, fuzzy=True)


def rdd_call(store, a, fuzzy: bool):
    from ..rdd import rdd_fuzzy, rdd_sharp

    table = get_table(store, a["table"])
    common = dict(
        outcome=a["outcome"],
        running=a["running"],
        cutoff=a["cutoff"],
        bandwidth=a["bandwidth"],
        kernel=a["kernel"],
        order=a["order"],
    )
    if fuzzy:
        return rdd_fuzzy(table, treatment_received=a["treatment_received"], **common)
    return rdd_sharp(table, **common)


def _h_derive(store, a):
    return derive_column(
        get_table(store, a["table"]),
        new_name=a["new_name"],
        transform=a["transform"],
        sources=a["sources"],
        threshold=a["threshold"],
    )


def _h_one_hot(store, a):
    return one_hot_encode(get_table(store, a["table"]), a["columns"], a["drop_first"])


def _h_median_split(store, a):
    table, _ = median_split(
        get_table(store, a["table"]),
        value_column=a["value_column"],
        key_column=a["key_column"],
        key_value=a["key_value"],
        entity_column=a["entity_column"],
        group_column=a["group_column"],
    )
    return table


def _h_describe(store, a):
    return describe(get_table(store, a["table"]))


# -- descriptors ---------------------------------------------------------------


def _regression_params(*extra: P) -> tuple[P, ...]:
    return (
        _TABLE,
        P("outcome", "string", required=True, description="dependent variable column"),
        P("regressors", "array", required=True, description="regressor column names, in order"),
        P("include_intercept", "boolean", default=True, description="prepend a constant term"),
        *extra,
        *_VCOV,
        P("weights", "string", description="optional positive weight column"),
    )


def builtin_descriptors() -> list[ToolDescriptor]:
    """All built-in tools, estimation and preparation alike."""
    d = ToolDescriptor
    return [
        d("ols", load_manual("ols"), _regression_params(), _h_ols),
        d(
            "panel_ols",
            load_manual("panel_ols"),
            _regression_params(
                P(
                    "fixed_effects",
                    "array",
                    required=True,
                    description="factor columns to absorb as fixed effects",
                ),
            ),
            _h_panel_ols,
        ),
        d(
            "logit_fit",
            load_manual("logit_fit"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="binary 0/1 outcome column"),
                P("regressors", "array", required=True, description="regressor column names"),
                P("include_intercept", "boolean", default=True, description="prepend a constant term"),
                P("max_iter", "integer", default=100, description="IRLS iteration cap"),
                P("tol", "number", default=1e-8, description="coefficient-change convergence tolerance"),
            ),
            _h_logit,
        ),
        d(
            "iv_2sls",
            load_manual("iv_2sls"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="dependent variable column"),
                P("endogenous", "array", required=True, description="endogenous regressor columns"),
                P("instruments", "array", required=True, description="excluded instrument columns"),
                P("exogenous", "array", default=[], description="exogenous control columns"),
                *_VCOV,
            ),
            _h_iv,
        ),
        d(
            "ps_regression_adjustment",
            load_manual("ps_regression_adjustment"),
            (
                _TABLE,
                P("treatment", "string", required=True, description="binary treatment column"),
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("covariates", "array", required=True, description="score-model covariates"),
                P("categorical", "array", default=[], description="covariates to dummy-encode first"),
                P(
                    "trim_mode",
                    "enum",
                    default="none",
                    values=("none", "quantile", "threshold"),
                    description="how to trim extreme scores",
                ),
                P("trim_lower", "number", default=0.1, description="lower trim bound"),
                P("trim_upper", "number", default=0.9, description="upper trim bound"),
                P(
                    "include_covariates_second_stage",
                    "boolean",
                    default=False,
                    description="add the covariates to the outcome regression",
                ),
                *_VCOV,
            ),
            _h_ps_adjust,
        ),
        d(
            "ps_matching",
            load_manual("ps_matching"),
            (
                _TABLE,
                P("treatment", "string", required=True, description="binary treatment column"),
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("covariates", "array", required=True, description="score-model covariates"),
                P("categorical", "array", default=[], description="covariates to dummy-encode first"),
                P("estimand", "enum", default="ATE", values=("ATE", "ATET"), description="which effect to report"),
                P("ratio", "integer", default=1, description="neighbors matched per unit"),
                P("with_replacement", "boolean", default=True, description="reuse matched neighbors"),
                P("bootstrap_reps", "integer", default=0, description="bootstrap replications for the SE (0 = none)"),
                P("seed", "integer", default=0, description="bootstrap seed"),
            ),
            _h_ps_match,
        ),
        d(
            "did_static",
            load_manual("did_static"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("treatment", "string", required=True, description="0/1 post-treatment indicator"),
                P("unit", "string", required=True, description="panel unit column"),
                P("time", "string", required=True, description="panel time column"),
                P("controls", "array", default=[], description="numeric control columns"),
                P(
                    "vcov",
                    "enum",
                    default="cluster",
                    values=("classical", "robust_hc1", "cluster"),
                    description="covariance estimator (defaults to clustering)",
                ),
                P(
                    "cluster_column",
                    "string",
                    description="cluster column; defaults to the unit column",
                ),
            ),
            _h_did_static,
        ),
        d(
            "did_event_study",
            load_manual("did_event_study"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("unit", "string", required=True, description="panel unit column"),
                P("time", "string", required=True, description="numeric panel time column"),
                P(
                    "adoption_time",
                    "string",
                    required=True,
                    description="per-unit first-treated period column (missing = never treated)",
                ),
                P("see_back", "integer", required=True, description="lead window length (>= 1)"),
                P("see_forward", "integer", required=True, description="lag window length (>= 0)"),
                P("controls", "array", default=[], description="numeric control columns"),
                P(
                    "lag_indexing",
                    "enum",
                    default="zero_based",
                    values=("zero_based", "one_based"),
                    description="label the adoption period Lag_D0 or Lag_D1",
                ),
                P(
                    "vcov",
                    "enum",
                    default="cluster",
                    values=("classical", "robust_hc1", "cluster"),
                    description="covariance estimator (defaults to clustering)",
                ),
                P(
                    "cluster_column",
                    "string",
                    description="cluster column; defaults to the unit column",
                ),
            ),
            _h_event_study,
        ),
        d(
            "rdd_sharp",
            load_manual("rdd_sharp"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("running", "string", required=True, description="running variable column"),
                P("cutoff", "number", required=True, description="treatment cutoff value"),
                P("bandwidth", "number", description="window half-width (rule of thumb when omitted)"),
                P("kernel", "enum", default="triangular", values=("triangular", "uniform"), description="weighting kernel"),
                P("order", "integer", default=1, description="local polynomial order (0, 1 or 2)"),
            ),
            _h_rdd_sharp,
        ),
        d(
            "rdd_fuzzy",
            load_manual("rdd_fuzzy"),
            (
                _TABLE,
                P("outcome", "string", required=True, description="numeric outcome column"),
                P("treatment_received", "string", required=True, description="realized treatment column"),
                P("running", "string", required=True, description="running variable column"),
                P("cutoff", "number", required=True, description="treatment cutoff value"),
                P("bandwidth", "number", description="window half-width (rule of thumb when omitted)"),
                P("kernel", "enum", default="triangular", values=("triangular", "uniform"), description="weighting kernel"),
                P("order", "integer", default=1, description="local polynomial order (0, 1 or 2)"),
            ),
            _h_rdd_fuzzy,
        ),
        d(
            "derive_column",
            load_manual("derive_column"),
            (
                _TABLE,
                P("new_name", "string", required=True, description="name of the new column"),
                P(
                    "transform",
                    "enum",
                    required=True,
                    values=("log", "square", "product", "difference", "indicator_ge"),
                    description="construction rule",
                ),
                P("sources", "array", required=True, description="source column names"),
                P("threshold", "number", description="threshold for indicator_ge"),
            ),
            _h_derive,
        ),
        d(
            "one_hot_encode",
            load_manual("one_hot_encode"),
            (
                _TABLE,
                P("columns", "array", required=True, description="categorical columns to encode"),
                P("drop_first", "boolean", default=True, description="drop the reference level"),
            ),
            _h_one_hot,
        ),
        d(
            "median_split",
            load_manual("median_split"),
            (
                _TABLE,
                P("value_column", "string", required=True, description="numeric column to split on"),
                P("key_column", "string", description="column selecting the reference rows"),
                P("key_value", "string", description="reference value within key_column"),
                P("entity_column", "string", description="entity column for per-entity flags"),
                P("group_column", "string", default="high_group", description="name of the new flag column"),
            ),
            _h_median_split,
        ),
        d(
            "describe",
            load_manual("describe"),
            (_TABLE,),
            _h_describe,
        ),
    ]


def default_registry() -> ToolRegistry:
    """Fresh registry holding every built-in tool."""
    registry = ToolRegistry()
    for descriptor in builtin_descriptors():
        registry = register_tool(registry, descriptor)
    return registry
