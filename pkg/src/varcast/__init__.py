"""Value-at-Risk forecasting toolkit.

A nonparametric SVR-GARCH-KDE hybrid next to parametric GARCH-family
benchmarks, evaluated over rolling windows with coverage tests, Lopez
losses and the SPA bootstrap test.
"""

__version__ = "0.1.0"

from .backtest import (
    ModelRun,
    SpaResult,
    TestReport,
    ViolationSeries,
    christoffersen,
    lopez_loss,
    lr_cc,
    lr_ind,
    lr_uc,
    run_backtest,
    spa_test,
    violations,
)
from .distributions import (
    NormalInnovation,
    SkewedTInnovation,
    StudentTInnovation,
    make_innovation,
)
from .garch import (
    GarchFit,
    GarchModel,
    GarchParams,
    GarchSpec,
    dist_quantile,
    filter_variance,
    fit_mle,
    var_forecast,
)
from .hybrid import SvrGarchKde, VarForecast, epsilon_from_psi, repair_variance
from .kde import GaussianKde, silverman_bandwidth
from .svr import SupportVectorRegressor, eps_insensitive_loss, rbf_kernel
from .timeseries import (
    ColumnSpec,
    PriceSeries,
    ReturnSeries,
    ScalingParams,
    WindowPlan,
    descriptive_stats,
    load_prices,
    log_returns,
    rolling_windows,
    standardize,
    unstandardize,
)
from .tuning import Grid, TuningResult, grid_search

__all__ = [
    "ColumnSpec",
    "GarchFit",
    "GarchModel",
    "GarchParams",
    "GarchSpec",
    "GaussianKde",
    "Grid",
    "ModelRun",
    "NormalInnovation",
    "PriceSeries",
    "ReturnSeries",
    "ScalingParams",
    "SkewedTInnovation",
    "SpaResult",
    "StudentTInnovation",
    "SupportVectorRegressor",
    "SvrGarchKde",
    "TestReport",
    "TuningResult",
    "VarForecast",
    "ViolationSeries",
    "WindowPlan",
    "christoffersen",
    "descriptive_stats",
    "dist_quantile",
    "eps_insensitive_loss",
    "epsilon_from_psi",
    "filter_variance",
    "fit_mle",
    "grid_search",
    "load_prices",
    "log_returns",
    "lopez_loss",
    "lr_cc",
    "lr_ind",
    "lr_uc",
    "make_innovation",
    "repair_variance",
    "rbf_kernel",
    "rolling_windows",
    "run_backtest",
    "silverman_bandwidth",
    "spa_test",
    "standardize",
    "unstandardize",
    "var_forecast",
    "violations",
]
