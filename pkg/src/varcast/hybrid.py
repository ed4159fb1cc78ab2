"""Nonparametric VaR model: staged SVR mean/variance fits plus a KDE quantile.

The return series is standardized internally, the conditional mean is fit
as an AR/ARMA regression with SVR (skipped entirely at the study default of
a zero mean process), the conditional variance is fit in two SVR stages on
the squared residuals (an AR stage, then an ARMA stage that adds the AR
stage's innovations as features), non-positive variance estimates are
repaired, and the alpha-quantile of the rescaled standardized residuals is
estimated with a Gaussian KDE. The VaR forecast recombines the pieces as
-(mu + sigma * q).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DegenerateSample, EmptyInput, NotFitted, SeriesTooShort
from .kde import GaussianKde
from .svr import SupportVectorRegressor
from .timeseries import ReturnSeries
from .validation import check_alpha, check_series

SERIALIZATION_VERSION = 1


def epsilon_from_psi(scaled_sq_disturbances, psi: float) -> float:
    """Tube half-width as the empirical psi-quantile of the squared scaled
    disturbances (linear interpolation; psi = 0 picks the sample minimum)."""
    x = np.asarray(scaled_sq_disturbances, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot take a quantile of an empty sample")
    if not 0.0 <= psi < 1.0:
        raise ValueError(f"psi must lie in [0, 1), got {psi}")
    return float(np.quantile(x, psi))


def repair_variance(estimates, first_fallback: float) -> np.ndarray:
    """Replace non-positive variance estimates by the last positive one.

    A non-positive leading estimate takes ``first_fallback`` (the first
    squared residual of the final mean model). Positive entries pass
    through unchanged.
    """
    if not first_fallback > 0.0:
        raise ValueError("first_fallback must be positive")
    x = np.asarray(estimates, dtype=float)
    out = np.empty_like(x)
    last = first_fallback
    for i, v in enumerate(x):
        if v > 0.0:
            out[i] = v
            last = v
        else:
            out[i] = last
    return out


def _lag_matrix(values: np.ndarray, lags: int, t0: int, t1: int) -> np.ndarray:
    """Feature rows [values[t-1], ..., values[t-lags]] for t in [t0, t1)."""
    return np.column_stack([values[t0 - k : t1 - k] for k in range(1, lags + 1)])


@dataclass(frozen=True)
class VarForecast:
    """One VaR number with its location/scale/quantile decomposition."""

    var_value: float
    mu_hat: float
    sigma_hat: float
    q_hat: float
    horizon: int = 1
    alpha: float = 0.05


class SvrGarchKde(BaseEstimator):
    """SVR-GARCH-KDE hybrid VaR forecaster.

    Parameters
    ----------
    C, gamma : float
        SVR regularization and RBF width shared by both variance stages
        (and by the mean stages unless overridden).
    psi : float in [0, 1)
        Quantile level that sets the SVR tube width from each stage's own
        targets.
    orders : tuple (s, d, e, p)
        AR/MA orders of the mean (s, d) and variance (e, p) models. The
        default (0, 0, 1, 1) assumes a zero mean process and one AR plus
        one MA term in the variance. e >= 1 is required; p = 0 drops the
        variance ARMA stage; s = d = 0 skips the mean stages.
    mean_C, mean_gamma, mean_epsilon : float or None
        Overrides for the mean-model SVR; None inherits C/gamma and the
        psi rule applied to the squared scaled returns.
    """

    def __init__(
        self,
        C=1.0,
        gamma=0.1,
        psi=0.5,
        orders=(0, 0, 1, 1),
        mean_C=None,
        mean_gamma=None,
        mean_epsilon=None,
        tol=1e-6,
        max_iter=None,
    ):
        self.C = C
        self.gamma = gamma
        self.psi = psi
        self.orders = orders
        self.mean_C = mean_C
        self.mean_gamma = mean_gamma
        self.mean_epsilon = mean_epsilon
        self.tol = tol
        self.max_iter = max_iter

    # -- fitting -----------------------------------------------------------

    def _svr(self, C, gamma, epsilon) -> SupportVectorRegressor:
        return SupportVectorRegressor(
            C=C, epsilon=epsilon, gamma=gamma, tol=self.tol, max_iter=self.max_iter
        )

    def fit(self, returns):
        s, d, e, p = (int(v) for v in self.orders)
        if min(s, d, e, p) < 0:
            raise ValueError("orders must be nonnegative")
        if e < 1:
            raise ValueError("the variance model needs at least one AR lag (e >= 1)")
        r_raw = returns.returns if isinstance(returns, ReturnSeries) else returns
        r_raw = check_series(r_raw, min_len=2, name="returns")
        T = r_raw.size
        if T <= s + d + e + p + 30:
            raise SeriesTooShort(
                f"need more than {s + d + e + p + 30} observations, got {T}"
            )

        mean = float(np.mean(r_raw))
        std = float(np.std(r_raw, ddof=1))
        if std == 0.0:
            from .errors import ConstantSeries

            raise ConstantSeries("cannot fit on a constant series")
        r = (r_raw - mean) / std

        mean_C = self.C if self.mean_C is None else self.mean_C
        mean_gamma = self.gamma if self.mean_gamma is None else self.mean_gamma
        mean_eps = (
            epsilon_from_psi(r * r, self.psi)
            if self.mean_epsilon is None
            else float(self.mean_epsilon)
        )

        # Mean process: AR(s) stage, then ARMA(s, d) stage on its residuals.
        # With s = d = 0 the mean is taken as zero and u* = r.
        mean_model = None
        if s > 0:
            X1 = _lag_matrix(r, s, s, T)
            ar_model = self._svr(mean_C, mean_gamma, mean_eps).fit(X1, r[s:])
            u_hat = r[s:] - ar_model.predict(X1)  # residuals for t in [s, T)
            if d > 0:
                u_full = np.concatenate([np.zeros(s), u_hat])
                X2 = np.hstack(
                    [_lag_matrix(r, s, s + d, T), _lag_matrix(u_full, d, s + d, T)]
                )
                mean_model = self._svr(mean_C, mean_gamma, mean_eps).fit(X2, r[s + d :])
                u_star = r[s + d :] - mean_model.predict(X2)
            else:
                mean_model = ar_model
                u_star = u_hat
        elif d > 0:
            raise ValueError("a moving-average mean part requires s >= 1")
        else:
            u_star = r.copy()
        sd = s + d
        u2 = u_star * u_star  # squared residuals, index t = sd + i

        # Variance process, AR(e) stage on the squared residuals. u2 is
        # local: index i holds the value at global time sd + i.
        t0 = sd + e
        Xv1 = _lag_matrix(u2, e, t0 - sd, T - sd)
        yv1 = u2[t0 - sd :]
        eps_v1 = epsilon_from_psi(yv1, self.psi)
        var_ar = self._svr(self.C, self.gamma, eps_v1).fit(Xv1, yv1)
        sig2_ar = var_ar.predict(Xv1)  # raw, may be non-positive
        nu_hat = yv1 - sig2_ar  # innovations, t in [sd+e, T)

        # ARMA(e, p) stage adds the innovation lags.
        if p > 0:
            t1 = sd + e + p
            nu_full = np.concatenate([np.zeros(e), nu_hat])  # align to u2 indexing
            Xv2 = np.hstack(
                [
                    _lag_matrix(u2, e, t1 - sd, T - sd),
                    _lag_matrix(nu_full, p, t1 - sd, T - sd),
                ]
            )
            yv2 = u2[t1 - sd :]
            eps_v2 = epsilon_from_psi(yv2, self.psi)
            var_model = self._svr(self.C, self.gamma, eps_v2).fit(Xv2, yv2)
            sig2_raw = var_model.predict(Xv2)
        else:
            t1 = t0
            var_model = var_ar
            sig2_raw = sig2_ar

        positive_u2 = u2[u2 > 0.0]
        if positive_u2.size == 0:
            raise DegenerateSample("all mean-model residuals are zero")
        sig2 = repair_variance(sig2_raw, float(positive_u2[0]))

        z = u_star[t1 - sd :] / np.sqrt(sig2)
        z_mean = float(np.mean(z))
        z_std = float(np.std(z, ddof=1))
        if z_std == 0.0:
            raise DegenerateSample("standardized residuals are constant")
        z_star = (z - z_mean) / z_std

        self.orders_ = (s, d, e, p)
        self.series_mean_ = mean
        self.series_std_ = std
        self.mean_model_ = mean_model
        self.var_ar_model_ = var_ar
        self.var_model_ = var_model
        self.uses_arma_variance_ = p > 0
        self.residual_mean_ = z_mean
        self.residual_std_ = z_std
        self.z_star_ = z_star
        self.kde_ = GaussianKde().fit(z_star)
        self.sigma2_ = sig2
        # lagged state, newest last, enough to roll every recursion forward
        self.state_ = {
            "r": r[-max(s, 1) :].copy(),
            "u": u_star[-max(d, 1) :].copy(),
            "u2": u2[-e:].copy(),
            "nu": nu_hat[-p:].copy() if p > 0 else np.empty(0),
            "last_sigma2": float(sig2[-1]),
        }
        return self

    # -- forecasting ---------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "kde_"):
            raise NotFitted("call fit before forecast")

    def _mean_step(self, r_hist, u_hist) -> float:
        s, d, _, _ = self.orders_
        if self.mean_model_ is None:
            return 0.0
        feats = [r_hist[-k] for k in range(1, s + 1)]
        if d > 0:
            feats += [u_hist[-k] for k in range(1, d + 1)]
        return float(self.mean_model_.predict(np.array(feats).reshape(1, -1))[0])

    def _variance_step(self, u2_hist, nu_hist) -> float:
        _, _, e, p = self.orders_
        feats = [u2_hist[-k] for k in range(1, e + 1)]
        if self.uses_arma_variance_:
            feats += [nu_hist[-k] for k in range(1, p + 1)]
        return float(self.var_model_.predict(np.array(feats).reshape(1, -1))[0])

    def forecast(self, alpha: float, horizon: int = 1) -> VarForecast:
        """VaR for the return ``horizon`` steps past the training window.

        Beyond one step the recursions are iterated with unknown future
        innovations replaced by their expectations: zero for the mean-model
        disturbance and the innovation term, and the model's own output for
        the future squared residual.
        """
        self._check_fitted()
        alpha = check_alpha(alpha)
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        s, d, e, p = self.orders_
        r_hist = list(self.state_["r"])
        u_hist = list(self.state_["u"])
        u2_hist = list(self.state_["u2"])
        nu_hist = list(self.state_["nu"])
        last_pos = self.state_["last_sigma2"]

        mu_sc = 0.0
        sig2_sc = last_pos
        for _ in range(horizon):
            mu_sc = self._mean_step(r_hist, u_hist)
            sig2_sc = self._variance_step(u2_hist, nu_hist)
            if sig2_sc <= 0.0:
                sig2_sc = last_pos
            else:
                last_pos = sig2_sc
            r_hist.append(mu_sc)
            u_hist.append(0.0)
            u2_hist.append(sig2_sc)
            nu_hist.append(0.0)

        q_hat = self.kde_.quantile(alpha)
        mu_hat = self.series_mean_ + self.series_std_ * mu_sc
        sigma_hat = self.series_std_ * float(np.sqrt(sig2_sc))
        return VarForecast(
            var_value=-(mu_hat + sigma_hat * q_hat),
            mu_hat=mu_hat,
            sigma_hat=sigma_hat,
            q_hat=q_hat,
            horizon=horizon,
            alpha=alpha,
        )

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "version": SERIALIZATION_VERSION,
            "params": self.get_params(),
            "orders": list(self.orders_),
            "series_scaler": {"mean": self.series_mean_, "std": self.series_std_},
            "mean_model": None if self.mean_model_ is None else self.mean_model_.to_dict(),
            "var_ar_model": self.var_ar_model_.to_dict(),
            "var_model": self.var_model_.to_dict(),
            "uses_arma_variance": self.uses_arma_variance_,
            "residual_scaler": {"mean": self.residual_mean_, "std": self.residual_std_},
            "kde": self.kde_.to_dict(),
            "state": {
                "r": self.state_["r"].tolist(),
                "u": self.state_["u"].tolist(),
                "u2": self.state_["u2"].tolist(),
                "nu": self.state_["nu"].tolist(),
                "last_sigma2": self.state_["last_sigma2"],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, state: dict) -> "SvrGarchKde":
        if state.get("version") != SERIALIZATION_VERSION:
            raise ValueError(f"unsupported model version {state.get('version')!r}")
        params = dict(state["params"])
        params["orders"] = tuple(params["orders"])
        model = cls(**params)
        model.orders_ = tuple(state["orders"])
        model.series_mean_ = float(state["series_scaler"]["mean"])
        model.series_std_ = float(state["series_scaler"]["std"])
        model.mean_model_ = (
            None
            if state["mean_model"] is None
            else SupportVectorRegressor.from_dict(state["mean_model"])
        )
        model.var_ar_model_ = SupportVectorRegressor.from_dict(state["var_ar_model"])
        model.var_model_ = SupportVectorRegressor.from_dict(state["var_model"])
        model.uses_arma_variance_ = bool(state["uses_arma_variance"])
        model.residual_mean_ = float(state["residual_scaler"]["mean"])
        model.residual_std_ = float(state["residual_scaler"]["std"])
        model.kde_ = GaussianKde.from_dict(state["kde"])
        model.z_star_ = model.kde_.samples_
        model.sigma2_ = None
        model.state_ = {
            "r": np.asarray(state["state"]["r"], dtype=float),
            "u": np.asarray(state["state"]["u"], dtype=float),
            "u2": np.asarray(state["state"]["u2"], dtype=float),
            "nu": np.asarray(state["state"]["nu"], dtype=float),
            "last_sigma2": float(state["state"]["last_sigma2"]),
        }
        return model

    @classmethod
    def from_json(cls, text: str) -> "SvrGarchKde":
        return cls.from_dict(json.loads(text))
