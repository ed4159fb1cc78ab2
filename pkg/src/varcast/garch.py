"""Parametric volatility benchmarks: GARCH, EGARCH and TGARCH by MLE.

All variants use one ARCH and one persistence lag, a zero mean process
(u_t = r_t) and one of three standardized innovation laws (normal,
Student-t, skewed Student-t). Estimation maximizes the average
log-likelihood over smoothly transformed, unconstrained parameters with a
multi-start Nelder-Mead simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator

from ._kernels import egarch_filter, garch_filter, tgarch_filter
from .distributions import make_innovation
from .errors import (
    BadDistParams,
    NonFiniteRecursion,
    NotConverged,
    OptimFailed,
    SeriesTooShort,
)
from .validation import check_alpha, check_series

VARIANTS = ("garch", "egarch", "tgarch")
DISTRIBUTIONS = ("norm", "std", "sstd")


@dataclass(frozen=True)
class GarchSpec:
    """Model variant plus innovation law; orders are fixed at (1,1)."""

    variant: str = "garch"
    dist: str = "norm"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"dist must be one of {DISTRIBUTIONS}, got {self.dist!r}")

    @property
    def label(self) -> str:
        names = {"garch": "GARCH", "egarch": "EGARCH", "tgarch": "TGARCH"}
        return f"{names[self.variant]}-{self.dist.upper()}"


@dataclass(frozen=True)
class GarchParams:
    """Coefficients for one spec; unused slots stay None.

    garch:  omega > 0, delta >= 0, theta >= 0, delta + theta < 1
    tgarch: omega > 0, delta_pos >= 0, delta_neg >= 0, theta >= 0
            (the recursion acts on sigma, negative shocks add delta_neg |u|)
    egarch: omega, rho, gamma_e unrestricted, |theta| < 1
    """

    omega: float
    theta: float
    delta: float | None = None
    delta_pos: float | None = None
    delta_neg: float | None = None
    rho: float | None = None
    gamma_e: float | None = None
    nu: float | None = None
    xi: float | None = None

    def validate(self, spec: GarchSpec) -> None:
        if spec.variant == "garch":
            if self.delta is None:
                raise ValueError("standard GARCH needs delta")
            if not (self.omega > 0 and self.delta >= 0 and self.theta >= 0):
                raise ValueError("standard GARCH needs omega > 0, delta, theta >= 0")
            if not self.delta + self.theta < 1.0:
                raise ValueError("stationarity requires delta + theta < 1")
        elif spec.variant == "tgarch":
            if self.delta_pos is None or self.delta_neg is None:
                raise ValueError("threshold GARCH needs delta_pos and delta_neg")
            if not (
                self.omega > 0
                and self.delta_pos >= 0
                and self.delta_neg >= 0
                and self.theta >= 0
            ):
                raise ValueError("threshold GARCH needs omega > 0 and nonnegative slopes")
        else:
            if self.rho is None or self.gamma_e is None:
                raise ValueError("exponential GARCH needs rho and gamma_e")
        if spec.dist in ("std", "sstd") and not (self.nu is not None and self.nu > 2):
            raise ValueError("t innovations need nu > 2")
        if spec.dist == "sstd" and not (self.xi is not None and self.xi > 0):
            raise ValueError("skewed-t innovations need xi > 0")


@dataclass(frozen=True)
class GarchFit:
    """Fitted state: parameters, log-likelihood and the filtered variances."""

    spec: GarchSpec
    params: GarchParams
    loglik: float
    sigma2: np.ndarray
    converged: bool
    grad_norm: float
    returns: np.ndarray

    def innovation(self):
        return make_innovation(self.spec.dist, nu=self.params.nu, xi=self.params.xi)


def _innovation_of(spec: GarchSpec, params: GarchParams):
    return make_innovation(spec.dist, nu=params.nu, xi=params.xi)


def filter_variance(spec: GarchSpec, params: GarchParams, returns) -> np.ndarray:
    """Run the conditional-variance recursion over the full sample.

    The recursion is seeded with the sample variance (sample std for the
    threshold variant, log sample variance for the exponential one); the
    mean process is zero so u_t = r_t.
    """
    u = check_series(returns, min_len=2, name="returns")
    params.validate(spec)
    init_var = float(np.var(u, ddof=1))
    if init_var <= 0.0:
        raise NonFiniteRecursion("zero-variance input cannot seed the filter")
    if spec.variant == "garch":
        sigma2 = garch_filter(u, params.omega, params.delta, params.theta, init_var)
    elif spec.variant == "tgarch":
        sigma2 = tgarch_filter(
            u,
            params.omega,
            params.delta_pos,
            params.delta_neg,
            params.theta,
            math.sqrt(init_var),
        )
    else:
        abs_m = _innovation_of(spec, params).abs_moment()
        sigma2 = egarch_filter(
            u,
            params.omega,
            params.rho,
            params.gamma_e,
            params.theta,
            abs_m,
            math.log(init_var),
        )
    if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0.0):
        raise NonFiniteRecursion("variance recursion left the positive reals")
    return sigma2


# --- parameter transforms -------------------------------------------------


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    p = min(max(p, 1e-12), 1.0 - 1e-12)
    return math.log(p / (1.0 - p))


def _n_params(spec: GarchSpec) -> int:
    base = {"garch": 3, "tgarch": 4, "egarch": 4}[spec.variant]
    extra = {"norm": 0, "std": 1, "sstd": 2}[spec.dist]
    return base + extra


def _untransform(spec: GarchSpec, x: np.ndarray) -> GarchParams:
    """Map the unconstrained optimizer vector to valid coefficients."""
    kw: dict = {"omega": 0.0, "theta": 0.0}
    if spec.variant == "garch":
        # persistence in (0,1) split between delta and theta keeps the
        # stationarity region open
        persistence = _sigmoid(x[1])
        share = _sigmoid(x[2])
        kw["omega"] = math.exp(x[0])
        kw["delta"] = persistence * share
        kw["theta"] = persistence * (1.0 - share)
        idx = 3
    elif spec.variant == "tgarch":
        kw["omega"] = math.exp(x[0])
        kw["delta_pos"] = math.exp(x[1])
        kw["delta_neg"] = math.exp(x[2])
        kw["theta"] = _sigmoid(x[3])
        idx = 4
    else:
        kw["omega"] = x[0]
        kw["rho"] = x[1]
        kw["gamma_e"] = x[2]
        # persistence capped just inside (-1, 1): keeps the log-variance
        # recursion stable and the objective smooth when the likelihood
        # pushes theta against the boundary on short windows
        kw["theta"] = 0.999 * math.tanh(x[3])
        idx = 4
    if spec.dist in ("std", "sstd"):
        # cap keeps the tail-moment formulas in precision-safe territory;
        # nu ~ 1e6 is indistinguishable from normal anyway
        kw["nu"] = 2.0 + math.exp(min(x[idx], 14.0))
        idx += 1
    if spec.dist == "sstd":
        kw["xi"] = math.exp(min(max(x[idx], -20.0), 20.0))
    return GarchParams(**kw)


def _transform(spec: GarchSpec, params: GarchParams) -> np.ndarray:
    out: list[float] = []
    if spec.variant == "garch":
        persistence = params.delta + params.theta
        share = params.delta / persistence if persistence > 0 else 0.5
        out = [math.log(params.omega), _logit(persistence), _logit(share)]
    elif spec.variant == "tgarch":
        out = [
            math.log(params.omega),
            math.log(max(params.delta_pos, 1e-12)),
            math.log(max(params.delta_neg, 1e-12)),
            _logit(params.theta),
        ]
    else:
        theta = min(max(params.theta / 0.999, -1.0 + 1e-9), 1.0 - 1e-9)
        out = [params.omega, params.rho, params.gamma_e, math.atanh(theta)]
    if spec.dist in ("std", "sstd"):
        out.append(math.log(params.nu - 2.0))
    if spec.dist == "sstd":
        out.append(math.log(params.xi))
    return np.array(out)


def _starting_points(spec: GarchSpec, sample_var: float) -> list[GarchParams]:
    """Three documented starts: persistent, moderate and near-iid."""
    shapes = [(0.05, 0.90), (0.10, 0.50), (0.02, 0.10)]
    starts = []
    for delta, theta in shapes:
        kw: dict = {}
        if spec.variant == "garch":
            kw = {
                "omega": sample_var * (1.0 - delta - theta),
                "delta": delta,
                "theta": theta,
            }
        elif spec.variant == "tgarch":
            kw = {
                "omega": math.sqrt(sample_var) * (1.0 - delta - theta),
                "delta_pos": delta,
                "delta_neg": delta,
                "theta": theta,
            }
        else:
            kw = {
                "omega": math.log(sample_var) * (1.0 - theta),
                "rho": -0.05,
                "gamma_e": 2.0 * delta,
                "theta": theta,
            }
        if spec.dist in ("std", "sstd"):
            kw["nu"] = 8.0
        if spec.dist == "sstd":
            kw["xi"] = 1.0
        starts.append(GarchParams(omega=kw.pop("omega"), theta=kw.pop("theta"), **kw))
    return starts


def _mean_negloglik(spec: GarchSpec, x: np.ndarray, u: np.ndarray) -> float:
    try:
        params = _untransform(spec, x)
    except OverflowError:
        return 1e10
    try:
        sigma2 = filter_variance(spec, params, u)
        innov = _innovation_of(spec, params)
    except (NonFiniteRecursion, BadDistParams, ValueError, OverflowError):
        return 1e10
    z = np.clip(u / np.sqrt(sigma2), -1e8, 1e8)
    ll = innov.logpdf(z) - 0.5 * np.log(sigma2)
    total = float(np.mean(ll))
    if not math.isfinite(total):
        return 1e10
    return -total


def _fd_gradient_norm(fun, x: np.ndarray) -> float:
    grad = np.empty_like(x)
    for k in range(x.size):
        h = 1e-6 * (1.0 + abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        grad[k] = (fun(xp) - fun(xm)) / (2.0 * h)
    return float(np.linalg.norm(grad))


def fit_mle(returns, spec: GarchSpec, max_restarts: int = 2) -> GarchFit:
    """Maximum-likelihood fit via multi-start Nelder-Mead.

    A fit is flagged converged when the finite-difference gradient of the
    average log-likelihood at the optimum has norm <= 1e-5 in the
    transformed (unconstrained) parameter space. Non-convergence returns
    the best iterate with ``converged=False``; only a degenerate input
    (constant series) raises ``OptimFailed``.
    """
    u = check_series(returns, min_len=100, name="returns")
    sample_var = float(np.var(u, ddof=1))
    if sample_var <= 0.0:
        raise OptimFailed("likelihood undefined for a constant series")

    def objective(x):
        return _mean_negloglik(spec, x, u)

    best_x = None
    best_f = np.inf
    for start in _starting_points(spec, sample_var):
        x0 = _transform(spec, start)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-11, "maxfev": 2500},
        )
        if res.fun < best_f:
            best_f = res.fun
            best_x = res.x
    if best_x is None or best_f >= 1e10:
        raise OptimFailed("no start produced a finite likelihood")

    grad_norm = _fd_gradient_norm(objective, best_x)
    restarts = 0
    while grad_norm > 1e-5 and restarts < max_restarts:
        res = minimize(
            objective,
            best_x,
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-13, "maxfev": 1500},
        )
        if res.fun <= best_f:
            best_f = res.fun
            best_x = res.x
        grad_norm = _fd_gradient_norm(objective, best_x)
        restarts += 1

    params = _untransform(spec, best_x)
    sigma2 = filter_variance(spec, params, u)
    loglik = -best_f * u.size
    return GarchFit(
        spec=spec,
        params=params,
        loglik=loglik,
        sigma2=sigma2,
        converged=bool(grad_norm <= 1e-5),
        grad_norm=grad_norm,
        returns=u,
    )


def dist_quantile(dist: str, alpha: float, nu: float | None = None, xi: float | None = None) -> float:
    """alpha-quantile of the standardized innovation law."""
    alpha = check_alpha(alpha)
    return float(make_innovation(dist, nu=nu, xi=xi).ppf(alpha))


def _one_step_variance(fit: GarchFit) -> float:
    p = fit.params
    u_last = float(fit.returns[-1])
    s2_last = float(fit.sigma2[-1])
    if fit.spec.variant == "garch":
        return p.omega + p.delta * u_last * u_last + p.theta * s2_last
    if fit.spec.variant == "tgarch":
        sig = math.sqrt(s2_last)
        up = max(u_last, 0.0)
        un = min(u_last, 0.0)
        nxt = p.omega + p.delta_pos * up - p.delta_neg * un + p.theta * sig
        return nxt * nxt
    z = u_last / math.sqrt(s2_last)
    abs_m = fit.innovation().abs_moment()
    ls = p.omega + p.rho * z + p.gamma_e * (abs(z) - abs_m) + p.theta * math.log(s2_last)
    return math.exp(ls)


def _iterate_variance(fit: GarchFit, sigma2: float, steps: int) -> float:
    """Push the recursion forward replacing unknown shocks by expectations.

    E u^2 = sigma^2 for the standard variant; for the threshold and
    exponential variants the shock terms are replaced by E|z|-based
    expectations of the fitted law (an approximation for those variants).
    """
    p = fit.params
    if fit.spec.variant == "garch":
        for _ in range(steps):
            sigma2 = p.omega + (p.delta + p.theta) * sigma2
        return sigma2
    if fit.spec.variant == "tgarch":
        abs_m = fit.innovation().abs_moment()
        sig = math.sqrt(sigma2)
        slope = p.theta + 0.5 * abs_m * (p.delta_pos + p.delta_neg)
        for _ in range(steps):
            sig = p.omega + slope * sig
        return sig * sig
    ls = math.log(sigma2)
    for _ in range(steps):
        ls = p.omega + p.theta * ls
    return math.exp(ls)


def var_forecast(fit: GarchFit, alpha: float, horizon: int = 1) -> float:
    """VaR (positive loss bound) for the return ``horizon`` days ahead."""
    alpha = check_alpha(alpha)
    if not fit.converged:
        raise NotConverged("refusing to forecast from a non-converged fit")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    sigma2 = _one_step_variance(fit)
    if horizon > 1:
        sigma2 = _iterate_variance(fit, sigma2, horizon - 1)
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise NonFiniteRecursion("forecast recursion produced a bad variance")
    q = dist_quantile(fit.spec.dist, alpha, nu=fit.params.nu, xi=fit.params.xi)
    return -math.sqrt(sigma2) * q


class GarchModel(BaseEstimator):
    """Estimator wrapper: fit a GARCH-family benchmark, then forecast VaR."""

    def __init__(self, variant="garch", dist="norm"):
        self.variant = variant
        self.dist = dist

    def fit(self, returns):
        self.fit_ = fit_mle(returns, GarchSpec(self.variant, self.dist))
        return self

    def forecast_var(self, alpha: float, horizon: int = 1) -> float:
        if not hasattr(self, "fit_"):
            from .errors import NotFitted

            raise NotFitted("call fit first")
        return var_forecast(self.fit_, alpha, horizon)
