import math

import numpy as np
import pytest
from numba import njit

from varcast.errors import NonFiniteInput
from varcast.svr import SupportVectorRegressor, eps_insensitive_loss, rbf_kernel


# --- brute-force dual oracle -------------------------------------------------
#
# Projected gradient ascent on the (rho, rho*) box/equality QP. Entirely
# independent of the production solver: dense 2n-dimensional iteration with
# an exact projection onto the intersection of the box and the hyperplane.


@njit(cache=True)
def _project(v, z, C):
    lo = -(np.max(np.abs(v)) + C + 1.0)
    hi = -lo
    for _ in range(90):
        lam = 0.5 * (lo + hi)
        s = 0.0
        for k in range(v.shape[0]):
            xk = v[k] - lam * z[k]
            if xk < 0.0:
                xk = 0.0
            elif xk > C:
                xk = C
            s += z[k] * xk
        if s > 0.0:
            lo = lam
        else:
            hi = lam
    lam = 0.5 * (lo + hi)
    out = np.empty_like(v)
    for k in range(v.shape[0]):
        xk = v[k] - lam * z[k]
        if xk < 0.0:
            xk = 0.0
        elif xk > C:
            xk = C
        out[k] = xk
    return out


@njit(cache=True)
def _pg_dual(K, y, C, eps, step, max_iter):
    n = y.shape[0]
    m = 2 * n
    z = np.empty(m)
    lin = np.empty(m)
    for i in range(n):
        z[i] = 1.0
        z[n + i] = -1.0
        lin[i] = y[i] - eps
        lin[n + i] = -y[i] - eps
    x = np.zeros(m)
    prev = -np.inf
    for it in range(max_iter):
        beta = x[:n] - x[n:]
        Kb = K @ beta
        grad = np.empty(m)
        for i in range(n):
            grad[i] = lin[i] - Kb[i]
            grad[n + i] = lin[n + i] + Kb[i]
        x = _project(x + step * grad, z, C)
        if it % 1000 == 999:
            beta = x[:n] - x[n:]
            obj = y @ beta - 0.5 * beta @ (K @ beta) - eps * np.sum(x)
            if abs(obj - prev) < 1e-14 * (1.0 + abs(obj)):
                break
            prev = obj
    beta = x[:n] - x[n:]
    return y @ beta - 0.5 * beta @ (K @ beta) - eps * np.sum(x)


def oracle_dual_objective(X, y, C, eps, gamma):
    """Optimal dual value by dense projected gradient (test-side Gram)."""
    X = np.asarray(X, float)
    n = X.shape[0]
    means = X.mean(axis=0)
    stds = X.std(axis=0, ddof=1) if n > 1 else np.ones(X.shape[1])
    stds = np.where(stds > 0, stds, 1.0)
    Xs = (X - means) / stds
    sq = ((Xs[:, None, :] - Xs[None, :, :]) ** 2).sum(axis=2)
    K = np.exp(-sq / (2.0 * gamma * gamma))
    lam_max = 2.0 * np.linalg.eigvalsh(K)[-1]
    step = 1.0 / max(lam_max, 1e-9)
    return _pg_dual(K, y.astype(float), float(C), float(eps), step, 1_000_000)


def primal_objective(model, X, y):
    beta = model.dual_coef_
    if beta.size:
        sq = ((model.support_vectors_[:, None, :] - model.support_vectors_[None, :, :]) ** 2).sum(axis=2)
        Ksv = np.exp(-sq / (2.0 * model.gamma**2))
        w_norm2 = beta @ Ksv @ beta
    else:
        w_norm2 = 0.0
    resid = y - model.predict(X)
    return 0.5 * w_norm2 + model.C * eps_insensitive_loss(resid, model.epsilon).sum()


class TestRbfKernel:
    def test_identity(self):
        assert rbf_kernel([1.0, 2.0], [1.0, 2.0], gamma=0.7) == 1.0

    def test_unit_distance(self):
        g = 1.0 / math.sqrt(2.0)  # denominator 2 g^2 = 1
        assert rbf_kernel([0.0], [1.0], gamma=g) == pytest.approx(math.exp(-1.0), abs=1e-9)

    def test_monotone_decay(self):
        vals = [rbf_kernel([0.0], [d], gamma=1.0) for d in (0.5, 1.0, 2.0, 5.0, 20.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-15

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rbf_kernel([0.0], [0.0, 1.0], gamma=1.0)


class TestEpsLoss:
    def test_inside_tube(self):
        assert eps_insensitive_loss(0.5, 1.0) == 0.0

    def test_outside_tube(self):
        assert eps_insensitive_loss(2.0, 0.5) == 1.5

    def test_symmetry(self):
        assert eps_insensitive_loss(-2.0, 0.5) == 1.5


class TestDegenerateFits:
    def test_single_point_inside_tube(self):
        m = SupportVectorRegressor(C=5.0, epsilon=0.5).fit([[0.0]], [3.0])
        assert m.dual_coef_.size == 0
        assert m.intercept_ == pytest.approx(3.0)
        assert m.predict([[0.0]])[0] == pytest.approx(3.0)
        assert m.predict([[9.0]])[0] == pytest.approx(3.0)

    def test_flat_data_inside_tube(self):
        m = SupportVectorRegressor(C=1.0, epsilon=0.1).fit([[0.0], [1.0]], [0.0, 0.0])
        assert m.dual_coef_.size == 0
        assert m.intercept_ == 0.0

    def test_inside_tube_bias_is_interval_midpoint(self):
        # spread 0.2 < 2 eps: no support vectors, b at the midpoint of
        # [max(y) - eps, min(y) + eps]
        y = np.array([1.0, 1.2, 1.1])
        m = SupportVectorRegressor(C=1.0, epsilon=0.3).fit([[0.0], [1.0], [2.0]], y)
        assert m.dual_coef_.size == 0
        assert m.intercept_ == pytest.approx(0.5 * ((y.max() - 0.3) + (y.min() + 0.3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteInput):
            SupportVectorRegressor().fit([[0.0], [1.0]], [0.0, np.nan])


class TestDualOracle:
    def test_matches_projected_gradient_on_random_instances(self, rng):
        n_instances = 60
        for i in range(n_instances):
            n = int(rng.integers(1, 7))
            d = int(rng.integers(1, 3))
            X = rng.normal(size=(n, d))
            y = rng.normal(size=n)
            C = float(rng.choice([0.1, 1.0, 10.0]))
            eps = float(rng.choice([0.0, 0.05, 0.3]))
            gamma = float(rng.choice([0.5, 1.0, 2.0]))
            m = SupportVectorRegressor(C=C, epsilon=eps, gamma=gamma, tol=1e-8).fit(X, y)
            ref = oracle_dual_objective(X, y, C, eps, gamma)
            assert m.dual_objective_ == pytest.approx(ref, abs=1e-6), f"instance {i}"
            assert m.kkt_violation_ <= 1e-6

    def test_dual_constraint_holds(self, rng):
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        m = SupportVectorRegressor(C=2.0, epsilon=0.05, gamma=1.0).fit(X, y)
        assert abs(m.dual_coef_.sum()) < 1e-6
        assert np.all(np.abs(m.dual_coef_) <= m.C + 1e-12)

    def test_duality_gap(self, rng):
        for _ in range(5):
            X = rng.normal(size=(50, 2))
            y = np.sin(X[:, 0]) + 0.1 * rng.normal(size=50)
            m = SupportVectorRegressor(C=5.0, epsilon=0.1, gamma=1.0, tol=1e-8).fit(X, y)
            primal = primal_objective(m, X, y)
            assert m.dual_objective_ <= primal + 1e-9
            assert primal - m.dual_objective_ <= 1e-4 * (1.0 + abs(primal))


class TestKktProperties:
    def test_residuals_inside_tube_or_at_bound(self, rng):
        X = rng.normal(size=(60, 2))
        y = np.cos(X[:, 0]) * X[:, 1] + 0.1 * rng.normal(size=60)
        C, eps, tol = 3.0, 0.15, 1e-8
        m = SupportVectorRegressor(C=C, epsilon=eps, gamma=1.0, tol=tol).fit(X, y)
        resid = y - m.predict(X)
        # reconstruct per-sample |beta| (zero where not retained)
        beta = np.zeros(60)
        Xs = (X - m.feature_means_) / m.feature_stds_
        for i, row in enumerate(Xs):
            for sv, b in zip(m.support_vectors_, m.dual_coef_):
                if np.allclose(row, sv, atol=1e-12):
                    beta[i] = b
                    break
        at_bound = np.abs(np.abs(beta) - C) <= 1e-8
        assert np.all((np.abs(resid) <= eps + 1e-6) | at_bound)

    def test_tube_feasible_data_has_no_svs(self, rng):
        # targets vary less than the tube width: omega = 0 is optimal
        X = rng.normal(size=(20, 1))
        y = 0.05 * rng.uniform(-1.0, 1.0, size=20)
        m = SupportVectorRegressor(C=10.0, epsilon=0.2).fit(X, y)
        assert m.dual_coef_.size == 0
        resid = y - m.predict(X)
        assert np.all(np.abs(resid) <= 0.2 + 1e-6)

    def test_huge_C_unchanged_on_tube_feasible_data(self, rng):
        X = rng.normal(size=(15, 1))
        y = 0.01 * X[:, 0]
        m1 = SupportVectorRegressor(C=1.0, epsilon=0.5).fit(X, y)
        m2 = SupportVectorRegressor(C=1e6, epsilon=0.5).fit(X, y)
        grid = rng.normal(size=(10, 1))
        np.testing.assert_allclose(m1.predict(grid), m2.predict(grid), atol=1e-9)

    def test_row_permutation_invariance(self, rng):
        X = rng.normal(size=(40, 2))
        y = X[:, 0] ** 2 - X[:, 1] + 0.05 * rng.normal(size=40)
        m1 = SupportVectorRegressor(C=5.0, epsilon=0.05, gamma=1.2, tol=1e-10).fit(X, y)
        perm = rng.permutation(40)
        m2 = SupportVectorRegressor(C=5.0, epsilon=0.05, gamma=1.2, tol=1e-10).fit(X[perm], y[perm])
        grid = rng.normal(size=(25, 2))
        np.testing.assert_allclose(m1.predict(grid), m2.predict(grid), atol=1e-10)


class TestSerialization:
    def test_round_trip(self, rng):
        X = rng.normal(size=(30, 2))
        y = X[:, 0] + 0.1 * rng.normal(size=30)
        m = SupportVectorRegressor(C=2.0, epsilon=0.05, gamma=0.8).fit(X, y)
        m2 = SupportVectorRegressor.from_dict(m.to_dict())
        grid = rng.normal(size=(12, 2))
        np.testing.assert_allclose(m.predict(grid), m2.predict(grid), atol=0)
