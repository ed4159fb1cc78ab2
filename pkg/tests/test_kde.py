import math

import numpy as np
import pytest
from scipy.integrate import quad

from varcast.errors import AlphaOutOfRange, DegenerateSample
from varcast.kde import GaussianKde, silverman_bandwidth

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


class TestSilverman:
    def test_two_point_hand_value(self):
        # std = sqrt(1/2), IQR = 0.5 -> IQR/1.34 wins; h = 0.9*(0.5/1.34)*2^(-1/5)
        expected = 0.9 * (0.5 / 1.34) * 2.0 ** (-0.2)
        assert silverman_bandwidth([0.0, 1.0]) == pytest.approx(expected, abs=1e-12)
        assert silverman_bandwidth([0.0, 1.0]) == pytest.approx(0.29235, abs=5e-6)

    def test_constant_sample_degenerate(self):
        with pytest.raises(DegenerateSample):
            silverman_bandwidth([3.0, 3.0, 3.0])

    def test_scale_homogeneity(self, rng):
        x = rng.normal(size=200)
        h = silverman_bandwidth(x)
        for c in (0.1, 2.0, 17.5):
            assert silverman_bandwidth(c * x) == pytest.approx(c * h, rel=1e-12)

    def test_tie_heavy_falls_back_to_std(self):
        # IQR 0 but std > 0
        x = np.array([0.0] * 40 + [5.0, -5.0])
        h = silverman_bandwidth(x)
        assert h == pytest.approx(0.9 * np.std(x, ddof=1) * x.size ** (-0.2))


class TestDensity:
    def test_duplicate_samples_at_query(self):
        k = GaussianKde(bandwidth=1.0).fit([0.0, 0.0])
        assert k.density(0.0) == pytest.approx(PHI0, abs=1e-12)

    def test_symmetric_pair(self):
        k = GaussianKde(bandwidth=1.0).fit([-1.0, 1.0])
        assert k.density(0.0) == pytest.approx(PHI0 * math.exp(-0.5), abs=1e-12)

    def test_integrates_to_one(self, rng):
        x = rng.normal(size=80)
        k = GaussianKde().fit(x)
        h = k.bandwidth_
        total, err = quad(k.density, x.min() - 40 * h, x.max() + 40 * h, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_density_is_cdf_derivative(self, rng):
        x = rng.normal(size=60)
        k = GaussianKde().fit(x)
        pts = rng.uniform(x.min(), x.max(), size=100)
        step = 1e-6
        fd = (k.cdf(pts + step) - k.cdf(pts - step)) / (2.0 * step)
        np.testing.assert_allclose(fd, k.density(pts), rtol=1e-6)


class TestCdf:
    def test_point_mass_center(self):
        k = GaussianKde(bandwidth=0.5).fit([0.0, 0.0])
        assert k.cdf(0.0) == 0.5

    def test_symmetric_pair_center(self):
        for h in (0.1, 1.0, 3.0):
            k = GaussianKde(bandwidth=h).fit([-1.0, 1.0])
            assert k.cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_upper_tail(self, rng):
        x = rng.normal(size=50)
        k = GaussianKde().fit(x)
        assert k.cdf(x.max() + 10 * k.bandwidth_) >= 1.0 - 1e-15

    def test_monotone(self, rng):
        x = rng.normal(size=50)
        k = GaussianKde().fit(x)
        grid = np.sort(rng.uniform(x.min() - 1, x.max() + 1, size=200))
        vals = k.cdf(grid)
        assert np.all(np.diff(vals) >= 0.0)


class TestQuantile:
    def test_symmetric_median(self):
        k = GaussianKde(bandwidth=0.7).fit([-1.0, 1.0])
        assert k.quantile(0.5) == pytest.approx(0.0, abs=1e-9)

    def test_round_trip(self, rng):
        x = rng.normal(size=40)
        k = GaussianKde().fit(x)
        for q in rng.uniform(x.min(), x.max(), size=20):
            assert k.quantile(float(k.cdf(q))) == pytest.approx(q, abs=1e-7)

    def test_normal_sample_tail_quantile(self):
        # averaged over seeds: the Silverman-smoothed quantile sits near
        # sqrt(1 + h^2) * z_0.05, well inside +-0.05 of the normal value
        vals = []
        for seed in range(5):
            x = np.random.default_rng(seed).standard_normal(10_000)
            vals.append(GaussianKde().fit(x).quantile(0.05))
        assert np.mean(vals) == pytest.approx(-1.6449, abs=0.05)

    def test_extreme_alpha_widens_bracket(self, rng):
        x = rng.standard_normal(100)
        k = GaussianKde().fit(x)
        q = k.quantile(1e-9)
        assert k.cdf(q) == pytest.approx(1e-9, abs=1e-10)

    def test_alpha_out_of_range(self):
        k = GaussianKde(bandwidth=1.0).fit([0.0, 1.0])
        for bad in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(AlphaOutOfRange):
                k.quantile(bad)

    def test_location_shift_equivariance(self, rng):
        x = rng.normal(size=60)
        k1 = GaussianKde().fit(x)
        k2 = GaussianKde().fit(x + 4.2)
        for a in (0.01, 0.05, 0.5, 0.9):
            assert k2.quantile(a) == pytest.approx(k1.quantile(a) + 4.2, abs=1e-9)
