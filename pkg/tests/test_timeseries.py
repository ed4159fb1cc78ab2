import math
from datetime import date

import numpy as np
import pytest

from varcast.errors import (
    ConstantSeries,
    NonPositivePrice,
    NoValidRows,
    SeriesTooShort,
    UnreadableFile,
)
from varcast.timeseries import (
    ColumnSpec,
    PriceSeries,
    ReturnSeries,
    WindowPlan,
    descriptive_stats,
    load_prices,
    log_returns,
    n_windows,
    restrict_to_targets,
    rolling_windows,
    standardize,
    synthetic_dates,
    unstandardize,
)


def make_returns(values):
    values = np.asarray(values, dtype=float)
    return ReturnSeries(synthetic_dates(values.size), values)


class TestLoadPrices:
    def test_basic_csv(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,adjclose\n2020-01-02,100\n2020-01-03,110\n")
        ps = load_prices(str(f))
        assert len(ps) == 2
        assert ps.prices.tolist() == [100.0, 110.0]

    def test_rows_sorted_by_date(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,adjclose\n2020-01-03,110\n2020-01-02,100\n")
        ps = load_prices(str(f))
        assert ps.prices.tolist() == [100.0, 110.0]
        assert ps.dates[0] == date(2020, 1, 2)

    def test_zero_price_rejected(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,adjclose\n2020-01-02,0\n2020-01-03,110\n")
        with pytest.raises(NonPositivePrice):
            load_prices(str(f))

    def test_missing_rows_dropped_and_counted(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,adjclose\n2020-01-02,100\n2020-01-03,\n2020-01-06,110\n")
        ps = load_prices(str(f))
        assert len(ps) == 2
        assert ps.n_dropped == 1

    def test_missing_file(self):
        with pytest.raises(UnreadableFile):
            load_prices("/nonexistent/prices.csv")

    def test_too_few_rows(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,adjclose\n2020-01-02,100\n")
        with pytest.raises(NoValidRows):
            load_prices(str(f))

    def test_custom_columns(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("Day;Close\n02.01.2020;100\n03.01.2020;110\n")
        spec = ColumnSpec(date_column="Day", price_column="Close",
                          date_format="%d.%m.%Y", delimiter=";")
        assert len(load_prices(str(f), spec)) == 2


class TestLogReturns:
    def test_formula(self):
        ps = PriceSeries(synthetic_dates(2), [100.0, 110.0])
        rs = log_returns(ps)
        assert rs.returns == pytest.approx([math.log(1.1)], abs=1e-12)

    def test_flat_prices(self):
        ps = PriceSeries(synthetic_dates(3), [100.0, 100.0, 100.0])
        assert log_returns(ps).returns.tolist() == [0.0, 0.0]

    def test_halving(self):
        ps = PriceSeries(synthetic_dates(2), [100.0, 50.0])
        assert log_returns(ps).returns[0] == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_telescoping_sum(self, rng):
        prices = np.exp(np.cumsum(rng.normal(0, 0.01, size=300))) * 50.0
        ps = PriceSeries(synthetic_dates(300), prices)
        total = log_returns(ps).returns.sum()
        assert total == pytest.approx(math.log(prices[-1] / prices[0]), abs=1e-10)


class TestStandardize:
    def test_two_points(self):
        scaled, params = standardize(make_returns([1.0, -1.0]))
        assert scaled.returns == pytest.approx([0.70710678, -0.70710678], abs=1e-8)
        assert params.mean == 0.0
        assert params.std == pytest.approx(math.sqrt(2.0))

    def test_constant_series_rejected(self):
        with pytest.raises(ConstantSeries):
            standardize(make_returns([5.0, 5.0, 5.0]))

    def test_round_trip(self, rng):
        r = make_returns(rng.normal(0.001, 0.02, size=100))
        scaled, params = standardize(r)
        back = unstandardize(scaled, params)
        np.testing.assert_allclose(back.returns, r.returns, atol=1e-12)

    def test_scaled_moments(self, rng):
        scaled, _ = standardize(make_returns(rng.normal(3.0, 7.0, size=50)))
        assert scaled.returns.mean() == pytest.approx(0.0, abs=1e-12)
        assert scaled.returns.std(ddof=1) == pytest.approx(1.0, abs=1e-12)


class TestRollingWindows:
    def test_horizon_one_counts(self, rng):
        r = make_returns(rng.normal(size=253))
        plan = WindowPlan(window_len=251, horizon=1)
        pairs = list(rolling_windows(r, plan))
        assert len(pairs) == 2
        assert [t for _, t in pairs] == [251, 252]

    def test_horizon_ten(self, rng):
        r = make_returns(rng.normal(size=261))
        pairs = list(rolling_windows(r, WindowPlan(window_len=251, horizon=10)))
        assert len(pairs) == 1
        assert pairs[0][1] == 260
        sl = pairs[0][0]
        assert sl.stop - sl.start == 251

    def test_too_short(self, rng):
        r = make_returns(rng.normal(size=251))
        with pytest.raises(SeriesTooShort):
            list(rolling_windows(r, WindowPlan(window_len=251, horizon=1)))

    def test_window_count_formula(self, rng):
        for n, w, h in [(300, 251, 1), (300, 251, 10), (40, 30, 1), (400, 100, 5)]:
            r = make_returns(rng.normal(size=n))
            plan = WindowPlan(window_len=w, horizon=h)
            assert len(list(rolling_windows(r, plan))) == max(0, n - w - h + 1)
            assert n_windows(n, plan) == max(0, n - w - h + 1)

    def test_min_window_length(self):
        with pytest.raises(ValueError):
            WindowPlan(window_len=10)

    def test_restrict_to_targets(self, rng):
        r = make_returns(rng.normal(size=100))
        plan = WindowPlan(window_len=30, horizon=1)
        sub = restrict_to_targets(r, plan, start=r.dates[50], end=r.dates[80])
        pairs = list(rolling_windows(sub, plan))
        targets = [sub.dates[t] for _, t in pairs]
        assert targets[0] == r.dates[50]
        assert targets[-1] == r.dates[80]

    def test_restrict_needs_history(self, rng):
        r = make_returns(rng.normal(size=50))
        plan = WindowPlan(window_len=45, horizon=1)
        with pytest.raises(SeriesTooShort):
            restrict_to_targets(r, plan, start=r.dates[10], end=None)


class TestDescriptiveStats:
    def test_symmetric_sample_has_zero_skew(self):
        st = descriptive_stats(make_returns([-2.0, -1.0, 1.0, 2.0]))
        assert st["skewness"] == pytest.approx(0.0, abs=1e-14)

    def test_center_values(self):
        st = descriptive_stats(make_returns([-1.0, 0.0, 1.0, 2.0, -2.0]))
        assert st["mean"] == pytest.approx(0.0, abs=1e-15)
        assert st["median"] == 0.0

    def test_normal_excess_kurtosis_near_zero(self, rng):
        st = descriptive_stats(rng.standard_normal(100_000))
        assert abs(st["kurtosis"]) < 0.1
        assert abs(st["skewness"]) < 0.05

    def test_variance_uses_n_minus_one(self):
        x = [1.0, 2.0, 3.0, 4.0]
        st = descriptive_stats(make_returns(x))
        assert st["variance"] == pytest.approx(np.var(x, ddof=1))

    def test_symmetry_about_nonzero_mean(self, rng):
        base = rng.normal(size=500)
        sym = np.concatenate([base, -base]) + 3.0
        st = descriptive_stats(make_returns(sym))
        assert st["skewness"] == pytest.approx(0.0, abs=1e-12)
