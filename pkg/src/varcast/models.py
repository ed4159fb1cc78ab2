"""Adapters giving every model the one-window forecasting interface.

The backtest harness only needs ``fit_forecast(train, alpha, horizon)``;
these wrappers refit the underlying estimator on each training window.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .garch import DISTRIBUTIONS, VARIANTS, GarchSpec, fit_mle, var_forecast
from .hybrid import SvrGarchKde


class HybridForecaster:
    """SVR-GARCH-KDE hybrid refit per window."""

    def __init__(self, C=1.0, gamma=0.1, psi=0.5, orders=(0, 0, 1, 1), tol=1e-6):
        self.C = C
        self.gamma = gamma
        self.psi = psi
        self.orders = tuple(orders)
        self.tol = tol

    def fit_forecast(self, train: np.ndarray, alpha: float, horizon: int) -> float:
        model = SvrGarchKde(
            C=self.C, gamma=self.gamma, psi=self.psi, orders=self.orders, tol=self.tol
        ).fit(train)
        return model.forecast(alpha, horizon).var_value


class GarchForecaster:
    """Parametric benchmark refit per window by MLE."""

    def __init__(self, variant: str, dist: str):
        self.spec = GarchSpec(variant, dist)

    def fit_forecast(self, train: np.ndarray, alpha: float, horizon: int) -> float:
        fit = fit_mle(train, self.spec)
        return var_forecast(fit, alpha, horizon)


class ConstantVarForecaster:
    """Fixed bound regardless of the window; useful as a plumbing check."""

    def __init__(self, value: float):
        self.value = float(value)

    def fit_forecast(self, train: np.ndarray, alpha: float, horizon: int) -> float:
        return self.value


def benchmark_names() -> list[str]:
    return [f"{v}-{d}" for v in VARIANTS for d in DISTRIBUTIONS]


def make_model(name: str, hybrid_params: dict | None = None):
    """Build a forecaster from its roster name.

    ``hybrid`` takes its C/gamma/psi from ``hybrid_params``; the nine
    benchmarks are named variant-dist, e.g. ``garch-norm`` or
    ``tgarch-sstd``.
    """
    if name == "hybrid":
        return HybridForecaster(**(hybrid_params or {}))
    if name.startswith("constant:"):
        return ConstantVarForecaster(float(name.split(":", 1)[1]))
    parts = name.split("-")
    if len(parts) == 2 and parts[0] in VARIANTS and parts[1] in DISTRIBUTIONS:
        return GarchForecaster(parts[0], parts[1])
    raise ConfigError(f"unknown model name {name!r}")
