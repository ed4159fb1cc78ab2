"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual quadratic program is solved by SMO-style two-coordinate ascent:
each iteration picks the maximal KKT-violating pair of feasible directions
and takes the exactly clipped analytic step. The fitted function is the
usual support-vector expansion sum_i beta_i k(x_i, x) + b with
beta_i = rho_i - rho_i*.
"""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._kernels import rbf_cross, rbf_gram, smo_solve
from .errors import NotFitted
from .validation import check_features


def rbf_kernel(x, y, gamma: float) -> float:
    """exp(-||x - y||^2 / (2 gamma^2)); gamma > 0 is the kernel width."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    return float(np.exp(-np.sum((x - y) ** 2) / (2.0 * gamma * gamma)))


def eps_insensitive_loss(residual, epsilon: float):
    """0 inside the tube of half-width epsilon, |residual| - epsilon outside."""
    if epsilon < 0.0:
        raise ValueError("epsilon must be nonnegative")
    return np.maximum(0.0, np.abs(residual) - epsilon)


class SupportVectorRegressor(BaseEstimator, RegressorMixin):
    """RBF-kernel epsilon-SVR fit by SMO on the dual.

    Parameters
    ----------
    C : float
        Regularization weight on tube violations, > 0.
    epsilon : float
        Half-width of the insensitive tube, >= 0. epsilon = 0 degenerates
        toward least-modulus regression and is allowed.
    gamma : float
        RBF width; the kernel is exp(-||x - x'||^2 / (2 gamma^2)).
    tol : float
        KKT tolerance for the dual solver.
    max_iter : int or None
        Iteration cap; None means max(100_000, 10 n^2).

    Attributes
    ----------
    support_vectors_ : ndarray of shape (n_sv, d), standardized rows
    dual_coef_ : ndarray of shape (n_sv,), the retained beta_i
    intercept_ : float
    converged_ : bool
    dual_objective_ : float, value of the dual at termination
    kkt_violation_ : float, max(0, KKT gap) at termination

    Features are standardized inside ``fit`` (per-feature mean/std with the
    n-1 denominator; constant features get std 1) and the same scaling is
    reapplied in ``predict``.
    """

    def __init__(self, C=1.0, epsilon=0.1, gamma=1.0, tol=1e-6, max_iter=None):
        self.C = C
        self.epsilon = epsilon
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = check_features(X)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y disagree in length")
        if not np.all(np.isfinite(y)):
            from .errors import NonFiniteInput

            raise NonFiniteInput("y contains non-finite values")
        if self.C <= 0.0:
            raise ValueError("C must be positive")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        n = X.shape[0]

        means = X.mean(axis=0)
        stds = X.std(axis=0, ddof=1) if n > 1 else np.ones(X.shape[1])
        stds = np.where(stds > 0.0, stds, 1.0)
        Xs = (X - means) / stds

        cap = self.max_iter if self.max_iter is not None else max(100_000, 10 * n * n)
        K = rbf_gram(np.ascontiguousarray(Xs), float(self.gamma))
        rho, rho_star, g, b_low, b_up, n_iter, converged = smo_solve(
            K, y, float(self.C), float(self.epsilon), float(self.tol), int(cap)
        )
        if not converged:
            warnings.warn(
                f"SVR solver hit the iteration cap ({cap}); returning best iterate",
                RuntimeWarning,
            )

        beta = rho - rho_star
        free = ((rho > 0.0) & (rho < self.C)) | ((rho_star > 0.0) & (rho_star < self.C))
        if np.any(free):
            cand = np.where(
                rho[free] > rho_star[free],
                y[free] - g[free] - self.epsilon,
                y[free] - g[free] + self.epsilon,
            )
            bias = float(np.mean(cand))
        else:
            bias = float(0.5 * (b_low + b_up))

        keep = np.abs(beta) > self.tol
        self.n_features_in_ = X.shape[1]
        self.feature_means_ = means
        self.feature_stds_ = stds
        self.support_vectors_ = Xs[keep]
        self.dual_coef_ = beta[keep]
        self.intercept_ = bias
        self.n_iter_ = int(n_iter)
        self.converged_ = bool(converged)
        self.kkt_violation_ = max(0.0, float(b_low - b_up))
        self.dual_objective_ = float(
            y @ beta - 0.5 * beta @ g - self.epsilon * (rho.sum() + rho_star.sum())
        )
        return self

    def predict(self, X):
        if not hasattr(self, "dual_coef_"):
            raise NotFitted("call fit before predict")
        X = check_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fit with {self.n_features_in_}"
            )
        Xs = (X - self.feature_means_) / self.feature_stds_
        if self.support_vectors_.shape[0] == 0:
            return np.full(X.shape[0], self.intercept_)
        ker = rbf_cross(
            np.ascontiguousarray(self.support_vectors_),
            np.ascontiguousarray(Xs),
            float(self.gamma),
        )
        return ker @ self.dual_coef_ + self.intercept_

    def to_dict(self) -> dict:
        """Serializable model state (kernel, coefficients, scaling)."""
        if not hasattr(self, "dual_coef_"):
            raise NotFitted("call fit before serializing")
        return {
            "C": self.C,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "tol": self.tol,
            "feature_means": self.feature_means_.tolist(),
            "feature_stds": self.feature_stds_.tolist(),
            "support_vectors": self.support_vectors_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
            "intercept": self.intercept_,
            "converged": self.converged_,
        }

    @classmethod
    def from_dict(cls, state: dict) -> "SupportVectorRegressor":
        model = cls(
            C=state["C"],
            epsilon=state["epsilon"],
            gamma=state["gamma"],
            tol=state.get("tol", 1e-6),
        )
        model.feature_means_ = np.asarray(state["feature_means"], dtype=float)
        model.feature_stds_ = np.asarray(state["feature_stds"], dtype=float)
        n_feat = model.feature_means_.shape[0]
        sv = np.asarray(state["support_vectors"], dtype=float).reshape(-1, n_feat)
        model.support_vectors_ = sv
        model.dual_coef_ = np.asarray(state["dual_coef"], dtype=float)
        model.intercept_ = float(state["intercept"])
        model.converged_ = bool(state["converged"])
        model.n_features_in_ = n_feat
        return model
