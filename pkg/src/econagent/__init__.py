"""Agentic econometrics workbench.

Layers: immutable data tables and estimators (this package root), a
function-calling tool registry (:mod:`econagent.tools`), a planning and
execution agent (:mod:`econagent.agent`), a replication-evaluation harness
(:mod:`econagent.harness`), plus a CLI and HTTP service.
"""

from .did import EventStudyResult, did_event_study, did_static
from .errors import EconAgentError
from .io import dumps_csv, load_csv, loads_csv, write_csv
from .iv import iv_2sls
from .linear import ols, panel_ols
from .logit import logit_fit, predict_proba
from .propensity import (
    MatchResult,
    TrimRule,
    estimate_propensity_scores,
    ps_matching,
    ps_regression_adjustment,
    trim_by_score,
)
from .rdd import RddResult, rdd_fuzzy, rdd_sharp
from .results import FitResult, RegressionSpec, VcovSpec
from .summary import describe
from .table import Column, DataTable
from .transforms import derive_column, median_split, one_hot_encode

__version__ = "0.1.0"

__all__ = [
    "Column",
    "DataTable",
    "EconAgentError",
    "EventStudyResult",
    "FitResult",
    "MatchResult",
    "RddResult",
    "RegressionSpec",
    "TrimRule",
    "VcovSpec",
    "derive_column",
    "describe",
    "did_event_study",
    "did_static",
    "dumps_csv",
    "estimate_propensity_scores",
    "iv_2sls",
    "load_csv",
    "loads_csv",
    "logit_fit",
    "median_split",
    "ols",
    "one_hot_encode",
    "panel_ols",
    "predict_proba",
    "ps_matching",
    "ps_regression_adjustment",
    "rdd_fuzzy",
    "rdd_sharp",
    "trim_by_score",
    "write_csv",
]
