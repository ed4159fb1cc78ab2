import numpy as np
import pytest

from varcast.distributions import make_innovation


def simulate_garch(omega, delta, theta, n, dist="norm", nu=None, xi=None, seed=0, burn=500):
    """Simulate a zero-mean GARCH(1,1) path by inverse-CDF sampling."""
    innov = make_innovation(dist, nu=nu, xi=xi)
    rng = np.random.default_rng(seed)
    z = np.asarray(innov.ppf(rng.uniform(1e-12, 1.0 - 1e-12, size=n + burn)))
    u = np.empty(n + burn)
    s2 = omega / (1.0 - delta - theta)
    for t in range(n + burn):
        u[t] = np.sqrt(s2) * z[t]
        s2 = omega + delta * u[t] ** 2 + theta * s2
    return u[burn:]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
