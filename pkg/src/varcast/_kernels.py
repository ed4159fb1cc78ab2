"""Compiled inner loops: the SMO dual solver and GARCH variance filters.

Kept in one private module so the rest of the package stays plain numpy.
All kernels are nopython/nogil, which lets the window-level thread pools in
the backtest and tuning layers run them in parallel.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def smo_solve(K, y, C, eps, tol, max_iter):
    """Two-coordinate ascent on the epsilon-SVR dual.

    Works on the 2n-variable box/equality form with the pair of dual
    vectors (rho, rho_star); each step picks the maximal KKT-violating
    pair of feasible directions and takes the clipped analytic step.

    Returns (rho, rho_star, g, b_low, b_up, n_iter, converged) where
    g[i] = sum_j beta_j K[i, j] and [b_low, b_up] is the bias interval
    implied by the KKT conditions at termination.
    """
    n = y.shape[0]
    rho = np.zeros(n)
    rho_star = np.zeros(n)
    g = np.zeros(n)
    it = 0
    converged = False
    m_val = 0.0
    big_m_val = 0.0
    while it < max_iter:
        # Feasible-direction scan. vm is the bias candidate of the rho
        # side (y - g - eps), vp of the rho* side (y - g + eps).
        m_val = -np.inf
        big_m_val = np.inf
        i = -1
        j = -1
        i_side = 0
        j_side = 0
        for u in range(n):
            resid = y[u] - g[u]
            vm = resid - eps
            vp = resid + eps
            if rho[u] < C and vm > m_val:
                m_val = vm
                i = u
                i_side = 0
            if rho_star[u] > 0.0 and vp > m_val:
                m_val = vp
                i = u
                i_side = 1
            if rho[u] > 0.0 and vm < big_m_val:
                big_m_val = vm
                j = u
                j_side = 0
            if rho_star[u] < C and vp < big_m_val:
                big_m_val = vp
                j = u
                j_side = 1
        if m_val - big_m_val <= tol:
            converged = True
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad < 1e-12:
            quad = 1e-12
        t = (m_val - big_m_val) / quad
        cap_i = (C - rho[i]) if i_side == 0 else rho_star[i]
        cap_j = rho[j] if j_side == 0 else (C - rho_star[j])
        if t > cap_i:
            t = cap_i
        if t > cap_j:
            t = cap_j
        # beta[i] moves by +t, beta[j] by -t regardless of side.
        if i_side == 0:
            rho[i] += t
        else:
            rho_star[i] -= t
        if j_side == 0:
            rho[j] -= t
        else:
            rho_star[j] += t
        for u in range(n):
            g[u] += t * (K[u, i] - K[u, j])
        it += 1
    return rho, rho_star, g, m_val, big_m_val, it, converged


@njit(cache=True, nogil=True)
def rbf_gram(X, gamma):
    """Gram matrix of exp(-||x_i - x_j||^2 / (2 gamma^2))."""
    n, d = X.shape
    K = np.empty((n, n))
    denom = 2.0 * gamma * gamma
    for i in range(n):
        K[i, i] = 1.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = X[i, k] - X[j, k]
                s += diff * diff
            v = np.exp(-s / denom)
            K[i, j] = v
            K[j, i] = v
    return K


@njit(cache=True, nogil=True)
def rbf_cross(S, X, gamma):
    """Kernel evaluations of query rows X against support rows S."""
    m, d = S.shape
    n = X.shape[0]
    out = np.empty((n, m))
    denom = 2.0 * gamma * gamma
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                diff = X[i, k] - S[j, k]
                s += diff * diff
            out[i, j] = np.exp(-s / denom)
    return out


@njit(cache=True, nogil=True)
def garch_filter(u, omega, delta, theta, sigma2_0):
    """sigma2_t = omega + delta u2_{t-1} + theta sigma2_{t-1}."""
    n = u.shape[0]
    sigma2 = np.empty(n)
    sigma2[0] = sigma2_0
    for t in range(1, n):
        sigma2[t] = omega + delta * u[t - 1] * u[t - 1] + theta * sigma2[t - 1]
    return sigma2


@njit(cache=True, nogil=True)
def tgarch_filter(u, omega, delta_pos, delta_neg, theta, sigma_0):
    """sigma_t = omega + delta+ u+_{t-1} - delta- u-_{t-1} + theta sigma_{t-1}.

    Returns the variance path (squared sigma). delta- >= 0 makes negative
    shocks add delta- * |u| to the standard deviation.
    """
    n = u.shape[0]
    sigma2 = np.empty(n)
    sig = sigma_0
    sigma2[0] = sig * sig
    for t in range(1, n):
        up = u[t - 1] if u[t - 1] > 0.0 else 0.0
        un = u[t - 1] if u[t - 1] < 0.0 else 0.0
        sig = omega + delta_pos * up - delta_neg * un + theta * sig
        sigma2[t] = sig * sig
    return sigma2


@njit(cache=True, nogil=True)
def egarch_filter(u, omega, rho, gamma_e, theta, abs_moment, logsig2_0):
    """ln sigma2_t = omega + rho z + gamma (|z| - E|z|) + theta ln sigma2_{t-1}."""
    n = u.shape[0]
    sigma2 = np.empty(n)
    ls = logsig2_0
    sigma2[0] = np.exp(ls)
    for t in range(1, n):
        z = u[t - 1] / np.sqrt(sigma2[t - 1])
        # saturate far outside any data scale: keeps the recursion (and the
        # likelihood surface over the parameters) finite and continuous
        if z > 1e8:
            z = 1e8
        elif z < -1e8:
            z = -1e8
        ls = omega + rho * z + gamma_e * (np.abs(z) - abs_moment) + theta * ls
        if not np.isfinite(ls) or ls > 700.0:
            ls = 700.0
        elif ls < -700.0:
            ls = -700.0
        sigma2[t] = np.exp(ls)
    return sigma2
