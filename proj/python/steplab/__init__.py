"""Learning-rate-free optimization: D-Adaptation and probabilistic line searches."""

from ._core import (
    ConfigError,
    GPSurrogate,
    InvalidArgument,
    NumericError,
    Oracle,
    Problem,
    ZeroGradientStart,
    bool_wolfe,
    bvn_quadrant,
    dadapt_sgd,
    expected_improvement,
    inexact_line_search,
    make_problem,
    pls,
    problem_names,
    run_experiment,
    sgd,
    sgd_pls_dadapt,
    verify,
)

__all__ = [
    "ConfigError",
    "GPSurrogate",
    "InvalidArgument",
    "NumericError",
    "Oracle",
    "Problem",
    "ZeroGradientStart",
    "bool_wolfe",
    "bvn_quadrant",
    "dadapt_sgd",
    "expected_improvement",
    "inexact_line_search",
    "make_problem",
    "pls",
    "problem_names",
    "run_experiment",
    "sgd",
    "sgd_pls_dadapt",
    "verify",
]
