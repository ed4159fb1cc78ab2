"""Price ingestion, log returns, scaling, rolling windows and summary stats.

All operations are pure functions over immutable inputs; nothing here keeps
state, so everything is safe to use concurrently.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    ConstantSeries,
    NonPositivePrice,
    NoValidRows,
    SeriesTooShort,
    UnreadableFile,
)
from .validation import check_series

_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none", "."}


@dataclass(frozen=True)
class PriceSeries:
    """Adjusted closing prices indexed by strictly increasing dates."""

    dates: tuple
    prices: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != prices.size:
            raise ValueError("dates and prices disagree in length")
        if prices.size < 2:
            raise SeriesTooShort("need at least 2 prices")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise NonPositivePrice("prices must be finite and strictly positive")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValueError(f"dates must be strictly increasing, got {a} then {b}")

    def __len__(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns; one fewer observation than the source prices."""

    dates: tuple
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != returns.size:
            raise ValueError("dates and returns disagree in length")
        if not np.all(np.isfinite(returns)):
            raise ValueError("returns must be finite")

    def __len__(self) -> int:
        return self.returns.size

    def slice(self, start: int, stop: int) -> "ReturnSeries":
        return ReturnSeries(self.dates[start:stop], self.returns[start:stop])


@dataclass(frozen=True)
class ScalingParams:
    """Mean/std pair mapping a series to zero mean and unit variance."""

    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0.0:
            raise ConstantSeries("scaling requires a non-constant series")


@dataclass(frozen=True)
class WindowPlan:
    """Rolling-window layout: window length, shift step and forecast horizon."""

    window_len: int = 251
    step: int = 1
    horizon: int = 1

    def __post_init__(self):
        if self.window_len < 30:
            raise ValueError("window_len must be >= 30")
        if self.step < 1 or self.horizon < 1:
            raise ValueError("step and horizon must be positive")


@dataclass(frozen=True)
class ColumnSpec:
    """How to read a delimited price file."""

    date_column: str = "date"
    price_column: str = "adjclose"
    date_format: str = "%Y-%m-%d"
    delimiter: str = ","


def load_prices(path: str, columns: ColumnSpec | None = None) -> PriceSeries:
    """Read a delimited text file with a header row into a ``PriceSeries``.

    Rows whose price field is missing are dropped and counted
    (``PriceSeries.n_dropped``); the result is sorted ascending by date.

    Raises
    ------
    UnreadableFile
        Missing file or header without the configured columns.
    NoValidRows
        Fewer than two parsable rows.
    NonPositivePrice
        Any parsed price <= 0.
    """
    spec = columns or ColumnSpec()
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"cannot open {path}: {exc}") from exc
    rows: list[tuple[date, float]] = []
    n_dropped = 0
    with fh:
        reader = csv.DictReader(fh, delimiter=spec.delimiter)
        if reader.fieldnames is None:
            raise UnreadableFile(f"{path}: no header row")
        missing = {spec.date_column, spec.price_column} - set(reader.fieldnames)
        if missing:
            raise UnreadableFile(f"{path}: header lacks column(s) {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            raw_price = (row.get(spec.price_column) or "").strip()
            if raw_price.lower() in _MISSING_TOKENS:
                n_dropped += 1
                continue
            raw_date = (row.get(spec.date_column) or "").strip()
            try:
                d = datetime.strptime(raw_date, spec.date_format).date()
            except ValueError as exc:
                raise UnreadableFile(f"{path}:{lineno}: bad date {raw_date!r}") from exc
            try:
                p = float(raw_price)
            except ValueError as exc:
                raise UnreadableFile(f"{path}:{lineno}: bad price {raw_price!r}") from exc
            if not math.isfinite(p) or p <= 0.0:
                raise NonPositivePrice(f"{path}:{lineno}: non-positive price {raw_price!r}")
            rows.append((d, p))
    if len(rows) < 2:
        raise NoValidRows(f"{path}: found {len(rows)} valid rows, need >= 2")
    rows.sort(key=lambda item: item[0])
    dates = tuple(d for d, _ in rows)
    if len(set(dates)) != len(dates):
        raise UnreadableFile(f"{path}: duplicate dates present")
    prices = np.array([p for _, p in rows])
    return PriceSeries(dates, prices, n_dropped=n_dropped)


def log_returns(p: PriceSeries) -> ReturnSeries:
    """r_t = ln(P_t) - ln(P_{t-1}); dated by the later observation."""
    rets = np.diff(np.log(p.prices))
    return ReturnSeries(p.dates[1:], rets)


def standardize(r: ReturnSeries) -> tuple[ReturnSeries, ScalingParams]:
    """Scale to sample mean 0 and sample std 1 (n-1 denominator)."""
    x = check_series(r.returns, min_len=2, name="returns")
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1))
    if std == 0.0:
        raise ConstantSeries("cannot standardize a constant series")
    params = ScalingParams(mean=mean, std=std)
    return ReturnSeries(r.dates, (x - mean) / std), params


def unstandardize(r: ReturnSeries, params: ScalingParams) -> ReturnSeries:
    """Inverse of ``standardize``."""
    return ReturnSeries(r.dates, r.returns * params.std + params.mean)


def rolling_windows(r: ReturnSeries, plan: WindowPlan) -> Iterator[tuple[slice, int]]:
    """Yield ``(train_slice, target_index)`` pairs in chronological order.

    Each slice covers ``window_len`` consecutive returns; the target sits
    ``horizon`` steps past the slice end.
    """
    n = len(r)
    if n < plan.window_len + plan.horizon:
        raise SeriesTooShort(
            f"series of {n} cannot host window {plan.window_len} + horizon {plan.horizon}"
        )
    start = 0
    while start + plan.window_len + plan.horizon - 1 < n:
        yield slice(start, start + plan.window_len), start + plan.window_len + plan.horizon - 1
        start += plan.step


def restrict_to_targets(r: ReturnSeries, plan: WindowPlan, start=None, end=None) -> ReturnSeries:
    """Trim the series so every rolling-window target date falls in
    [start, end]; training data reaches back before the block as needed."""
    idx = [i for i, d in enumerate(r.dates) if (start is None or d >= start) and (end is None or d <= end)]
    if not idx:
        raise SeriesTooShort("no observations inside the requested block")
    lead = plan.window_len + plan.horizon - 1
    first = idx[0] - lead
    if first < 0:
        raise SeriesTooShort(
            f"block starting {r.dates[idx[0]]} needs {lead} earlier observations, have {idx[0]}"
        )
    return r.slice(first, idx[-1] + 1)


def n_windows(n: int, plan: WindowPlan) -> int:
    """Number of windows ``rolling_windows`` emits for a series of length n."""
    span = n - plan.window_len - plan.horizon + 1
    if span <= 0:
        return 0
    return (span + plan.step - 1) // plan.step


def descriptive_stats(r: ReturnSeries | np.ndarray) -> dict:
    """Quartiles, mean, median, variance (n-1), skewness and excess kurtosis.

    Skewness and kurtosis are the standardized third/fourth central moments
    computed with population denominators; kurtosis is reported in excess
    form so the normal distribution scores ~0. Quantiles interpolate
    linearly between order statistics.
    """
    x = r.returns if isinstance(r, ReturnSeries) else np.asarray(r, dtype=float)
    x = check_series(x, min_len=4, name="returns")
    mean = float(np.mean(x))
    centered = x - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    if m2 == 0.0:
        raise ConstantSeries("moments undefined for a constant series")
    return {
        "q1": float(np.percentile(x, 25)),
        "mean": mean,
        "median": float(np.median(x)),
        "q3": float(np.percentile(x, 75)),
        "variance": float(np.var(x, ddof=1)),
        "skewness": m3 / m2**1.5,
        "kurtosis": m4 / m2**2 - 3.0,
    }


def synthetic_dates(n: int, start: date | None = None) -> tuple:
    """Consecutive weekday dates, handy for simulated series."""
    from datetime import timedelta

    d = start or date(2000, 1, 3)
    out = []
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d = d + timedelta(days=1)
    return tuple(out)
