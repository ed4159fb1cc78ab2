"""Straight-line reference of the staged VaR pipeline for golden testing.

Deliberately minimal and independent of the package's pipeline class: the
scaling, lag building, residual bookkeeping, variance repair, rescaling and
quantile inversion are all written inline. It shares only the SVR solver
primitive (which has its own brute-force oracle) so intermediate
quantities are comparable to machine precision. Covers the zero-mean
default with one AR and one MA variance lag.
"""
import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from varcast.svr import SupportVectorRegressor


def reference_pipeline(r_raw, C, gamma, psi, alpha, tol=1e-8):
    r_raw = np.asarray(r_raw, dtype=float)
    m = r_raw.mean()
    s = r_raw.std(ddof=1)
    r = (r_raw - m) / s

    u_star = r.copy()
    u2 = u_star**2

    # variance AR(1) stage
    X1 = u2[:-1].reshape(-1, 1)
    y1 = u2[1:]
    svr1 = SupportVectorRegressor(
        C=C, epsilon=float(np.quantile(y1, psi)), gamma=gamma, tol=tol
    ).fit(X1, y1)
    sig2_ar = svr1.predict(X1)
    nu = y1 - sig2_ar  # nu_t for t = 1 .. T-1

    # variance ARMA(1,1) stage
    X2 = np.column_stack([u2[1:-1], nu[:-1]])
    y2 = u2[2:]
    svr2 = SupportVectorRegressor(
        C=C, epsilon=float(np.quantile(y2, psi)), gamma=gamma, tol=tol
    ).fit(X2, y2)
    sig2_raw = svr2.predict(X2)

    # repair: last positive carries forward, first falls back to the first
    # positive squared residual
    fallback = u2[u2 > 0][0]
    sig2 = np.empty_like(sig2_raw)
    last = fallback
    for i, v in enumerate(sig2_raw):
        if v > 0:
            last = v
        sig2[i] = last if v <= 0 else v

    z = u_star[2:] / np.sqrt(sig2)
    z_star = (z - z.mean()) / z.std(ddof=1)

    # Silverman bandwidth and KDE quantile by brentq on the smoothed CDF
    h = (
        0.9
        * min(z_star.std(ddof=1), (np.percentile(z_star, 75) - np.percentile(z_star, 25)) / 1.34)
        * z_star.size ** (-0.2)
    )
    cdf = lambda x: norm.cdf((x - z_star) / h).mean()
    q = brentq(
        lambda x: cdf(x) - alpha,
        z_star.min() - 50 * h,
        z_star.max() + 50 * h,
        xtol=1e-13,
    )

    # one-step-ahead forecast
    sig2_next = float(svr2.predict(np.array([[u2[-1], nu[-1]]]))[0])
    if sig2_next <= 0:
        sig2_next = float(sig2[-1])
    mu_hat = m
    sigma_hat = s * np.sqrt(sig2_next)
    var_value = -(mu_hat + sigma_hat * q)
    return {
        "u_star_scaled": u_star,
        "sigma2": sig2,
        "z_star": z_star,
        "q": q,
        "mu_hat": mu_hat,
        "sigma_hat": sigma_hat,
        "var": var_value,
    }
