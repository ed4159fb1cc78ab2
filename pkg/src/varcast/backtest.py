"""VaR backtesting: coverage tests, Lopez loss, SPA test, rolling harness.

The likelihood-ratio framework tests unconditional coverage (the violation
rate equals alpha), independence (violations do not cluster, judged through
a first-order Markov chain on the violation flags) and conditional coverage
(their sum). The SPA test bootstraps whether any alternative model beats a
benchmark in expected Lopez loss.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy.special import gammaincc

from .errors import DegenerateLosses, VarcastError
from .timeseries import ReturnSeries, WindowPlan, rolling_windows
from .validation import check_alpha

logger = logging.getLogger(__name__)


def chi2_sf(x: float, df: int) -> float:
    """Survival function of chi-squared via the regularized upper
    incomplete gamma function."""
    if x < 0.0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class ViolationSeries:
    """Binary exceedance flags against a target level alpha."""

    flags: np.ndarray
    alpha: float

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=np.int8)
        if flags.size and not np.all((flags == 0) | (flags == 1)):
            raise ValueError("violation flags must be 0/1")
        object.__setattr__(self, "flags", flags)
        check_alpha(self.alpha)

    @property
    def n(self) -> int:
        return int(self.flags.size)

    @property
    def count(self) -> int:
        return int(self.flags.sum())


@dataclass(frozen=True)
class TestReport:
    """Christoffersen statistics and p-values for one violation series."""

    lr_uc: float
    lr_ind: float
    lr_cc: float
    p_uc: float
    p_ind: float
    p_cc: float
    violation_rate: float
    pi01: float
    pi11: float


def violations(returns_at_targets, forecasts, alpha: float) -> ViolationSeries:
    """V_t = 1 iff r_t < -VaR_t (strict; forecasts are positive loss bounds)."""
    r = np.asarray(returns_at_targets, dtype=float)
    v = np.asarray(forecasts, dtype=float)
    if r.shape != v.shape:
        raise ValueError(f"length mismatch: {r.shape} vs {v.shape}")
    return ViolationSeries((r < -v).astype(np.int8), alpha)


def _xlogy(x: float, y: float) -> float:
    # 0 * log(0) = 0 convention used throughout the LR statistics
    return 0.0 if x == 0.0 else x * math.log(y)


def lr_uc(v: ViolationSeries) -> tuple[float, float]:
    """Unconditional coverage: H0 is a violation rate equal to alpha."""
    n, x = v.n, v.count
    if n < 1:
        raise ValueError("need at least one observation")
    pi_hat = x / n
    # the 0*log(0) convention makes every term below safe at the boundary
    ll_null = _xlogy(n - x, 1.0 - v.alpha) + _xlogy(x, v.alpha)
    ll_alt = _xlogy(n - x, 1.0 - pi_hat) + _xlogy(x, pi_hat)
    stat = max(0.0, -2.0 * (ll_null - ll_alt))
    return stat, chi2_sf(stat, 1)


def lr_ind(v: ViolationSeries) -> tuple[float, float]:
    """Independence: H0 is equal transition probabilities into a violation
    regardless of yesterday's state. Degenerate rows contribute zero."""
    stat, _, _ = _lr_ind_parts(v)
    return stat, chi2_sf(stat, 1)


def _lr_ind_parts(v: ViolationSeries) -> tuple[float, float, float]:
    f = v.flags
    if f.size < 2:
        raise ValueError("need at least two observations for transitions")
    prev, cur = f[:-1], f[1:]
    n00 = int(np.sum((prev == 0) & (cur == 0)))
    n01 = int(np.sum((prev == 0) & (cur == 1)))
    n10 = int(np.sum((prev == 1) & (cur == 0)))
    n11 = int(np.sum((prev == 1) & (cur == 1)))
    m = n00 + n01 + n10 + n11
    pi01 = n01 / (n00 + n01) if (n00 + n01) > 0 else 0.0
    pi11 = n11 / (n10 + n11) if (n10 + n11) > 0 else 0.0
    pi = (n01 + n11) / m
    ll_null = _xlogy(n00 + n10, 1.0 - pi) + _xlogy(n01 + n11, pi)
    ll_alt = (
        _xlogy(n00, 1.0 - pi01)
        + _xlogy(n01, pi01)
        + _xlogy(n10, 1.0 - pi11)
        + _xlogy(n11, pi11)
    )
    stat = max(0.0, -2.0 * (ll_null - ll_alt))
    return stat, pi01, pi11


def lr_cc(v: ViolationSeries) -> tuple[float, float]:
    """Conditional coverage: the sum of the UC and IND statistics, chi2(2)."""
    uc, _ = lr_uc(v)
    ind, _ = lr_ind(v)
    stat = uc + ind
    return stat, chi2_sf(stat, 2)


def christoffersen(v: ViolationSeries) -> TestReport:
    """All three LR tests assembled into one report."""
    uc_stat, uc_p = lr_uc(v)
    ind_stat, pi01, pi11 = _lr_ind_parts(v)
    ind_p = chi2_sf(ind_stat, 1)
    cc_stat = uc_stat + ind_stat
    return TestReport(
        lr_uc=uc_stat,
        lr_ind=ind_stat,
        lr_cc=cc_stat,
        p_uc=uc_p,
        p_ind=ind_p,
        p_cc=chi2_sf(cc_stat, 2),
        violation_rate=v.count / v.n,
        pi01=pi01,
        pi11=pi11,
    )


def lopez_loss(returns_at_targets, forecasts, alpha: float) -> np.ndarray:
    """1 + squared shortfall beyond the bound on violation days, else 0."""
    r = np.asarray(returns_at_targets, dtype=float)
    v = np.asarray(forecasts, dtype=float)
    if r.shape != v.shape:
        raise ValueError(f"length mismatch: {r.shape} vs {v.shape}")
    hit = r < -v
    return np.where(hit, 1.0 + (r + v) ** 2, 0.0)


@dataclass(frozen=True)
class SpaResult:
    """Superior-predictive-ability test outcome for one benchmark."""

    t_stat: float
    p_value: float
    n_bootstrap: int
    block_param: float
    seed: int
    benchmark_index: int


def _stationary_bootstrap_indices(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """One resample of 0..n-1 with geometric blocks of mean length 1/q."""
    restart = rng.random(n) < q
    restart[0] = True
    starts_pool = rng.integers(0, n, size=n)
    positions = np.arange(n)
    seg_start = np.maximum.accumulate(np.where(restart, positions, -1))
    return (starts_pool[seg_start] + (positions - seg_start)) % n


def _spa_variances(d: np.ndarray, q: float) -> np.ndarray:
    """Hansen's kernel-weighted long-run variance of sqrt(n) * mean(d_k).

    Autocovariance lags are truncated once the geometric kernel weight
    falls below 1e-12; the tail term is negligible at that point.
    """
    n, m = d.shape
    centered = d - d.mean(axis=0)
    gamma0 = np.mean(centered * centered, axis=0)
    omega2 = gamma0.copy()
    max_lag = min(n - 1, int(math.ceil(math.log(1e-12) / math.log(1.0 - q))))
    for i in range(1, max_lag + 1):
        kernel = ((n - i) / n) * (1.0 - q) ** i + (i / n) * (1.0 - q) ** (n - i)
        gamma_i = np.sum(centered[:-i] * centered[i:], axis=0) / n
        omega2 += 2.0 * kernel * gamma_i
    return np.sqrt(np.maximum(omega2, 0.0))


def spa_test(
    losses_by_model,
    benchmark_index: int,
    n_boot: int = 1000,
    block_q: float = 0.1,
    seed: int = 0,
) -> SpaResult:
    """Hansen's SPA test of the benchmark column against all others.

    The statistic is max_k max(0, sqrt(n) dbar_k / omega_k) for the loss
    differentials d_k = L_benchmark - L_k. The null distribution comes from
    stationary-bootstrap resamples recentered by the consistent rule: each
    column is recentered by its sample mean unless that mean is below the
    law-of-iterated-logarithm band, in which case it is left alone. High
    p-values mean no alternative looks superior to the benchmark.
    """
    losses = np.asarray(losses_by_model, dtype=float)
    if losses.ndim != 2 or losses.shape[1] < 2:
        raise ValueError("need an n x (m+1) loss matrix with m >= 1 alternatives")
    n, n_models = losses.shape
    if n < 50:
        raise ValueError(f"SPA needs at least 50 loss observations, got {n}")
    if not 0 <= benchmark_index < n_models:
        raise ValueError("benchmark_index out of range")
    if not 0.0 < block_q < 1.0:
        raise ValueError("block_q must lie in (0, 1)")
    others = [k for k in range(n_models) if k != benchmark_index]
    d = losses[:, [benchmark_index]] - losses[:, others]

    if not np.any(d):
        # every model identical to the benchmark: nothing to test
        return SpaResult(0.0, 1.0, n_boot, block_q, seed, benchmark_index)

    d_bar = d.mean(axis=0)
    omega = _spa_variances(d, block_q)
    omega = np.maximum(omega, 1e-12)
    sqrt_n = math.sqrt(n)
    t_stat = float(max(0.0, np.max(sqrt_n * d_bar / omega)))

    lil_band = np.sqrt((omega**2 / n) * 2.0 * math.log(math.log(n)))
    mu = np.where(d_bar >= -lil_band, d_bar, 0.0)

    exceed = 0
    for b in range(n_boot):
        # per-resample derived seed: resamples stay independent of how they
        # are scheduled, so the test is reproducible under parallelism
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        )
        idx = _stationary_bootstrap_indices(n, block_q, rng)
        d_star = d[idx].mean(axis=0)
        t_star = max(0.0, float(np.max(sqrt_n * (d_star - mu) / omega)))
        if t_star >= t_stat:
            exceed += 1
    return SpaResult(
        t_stat=t_stat,
        p_value=exceed / n_boot,
        n_bootstrap=n_boot,
        block_param=block_q,
        seed=seed,
        benchmark_index=benchmark_index,
    )


# -- rolling harness ---------------------------------------------------------


class VarForecaster(Protocol):
    """Anything that turns a training window into one VaR number."""

    def fit_forecast(self, train: np.ndarray, alpha: float, horizon: int) -> float: ...


@dataclass
class ModelRun:
    """Pooled out-of-sample results for one model."""

    name: str
    target_indices: np.ndarray
    realized: np.ndarray
    forecasts: np.ndarray
    violation_series: ViolationSeries
    tests: TestReport
    losses: np.ndarray
    n_skipped: int
    spa: SpaResult | None = None


def run_backtest(
    series: ReturnSeries,
    models: Sequence[tuple[str, VarForecaster]],
    plan: WindowPlan,
    alpha: float,
    seed: int = 0,
    n_boot: int = 1000,
    block_q: float = 0.1,
    n_jobs: int = 1,
    run_spa: bool = True,
) -> dict[str, ModelRun]:
    """Roll every model over the series and assemble per-model reports.

    Each window is refit from scratch; a model failure on a window is
    logged and that window is skipped for that model, never imputed. The
    SPA test is run once per model as benchmark, on the target days where
    every model produced a forecast.
    """
    alpha = check_alpha(alpha)
    if not models:
        raise ValueError("need at least one model")
    names = [name for name, _ in models]
    if len(set(names)) != len(names):
        raise ValueError("model names must be unique")
    windows = list(rolling_windows(series, plan))
    returns = series.returns

    def one_window(item):
        sl, ti = item
        train = returns[sl]
        row = []
        for name, model in models:
            try:
                row.append(float(model.fit_forecast(train, alpha, plan.horizon)))
            except VarcastError as exc:
                logger.warning("window ending %d: model %s failed: %s", sl.stop, name, exc)
                row.append(math.nan)
        return ti, row

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(one_window, windows))
    else:
        rows = [one_window(w) for w in windows]

    results: dict[str, ModelRun] = {}
    matrix = np.array([r for _, r in rows], dtype=float)  # (n_windows, n_models)
    targets = np.array([t for t, _ in rows], dtype=int)
    for j, (name, _) in enumerate(models):
        ok = np.isfinite(matrix[:, j])
        if not np.any(ok):
            raise VarcastError(f"model {name} produced zero forecasts")
        idx = targets[ok]
        var = matrix[ok, j]
        realized = returns[idx]
        v = violations(realized, var, alpha)
        results[name] = ModelRun(
            name=name,
            target_indices=idx,
            realized=realized,
            forecasts=var,
            violation_series=v,
            tests=christoffersen(v),
            losses=lopez_loss(realized, var, alpha),
            n_skipped=int(np.sum(~ok)),
        )

    if run_spa and len(models) >= 2:
        common = np.all(np.isfinite(matrix), axis=1)
        if int(common.sum()) < 50:
            logger.warning(
                "skipping SPA: only %d common forecast days (need 50)", int(common.sum())
            )
        else:
            realized_common = returns[targets[common]]
            loss_matrix = np.column_stack(
                [
                    lopez_loss(realized_common, matrix[common, j], alpha)
                    for j in range(len(models))
                ]
            )
            for j, (name, _) in enumerate(models):
                results[name].spa = spa_test(
                    loss_matrix, j, n_boot=n_boot, block_q=block_q, seed=seed
                )
    return results
