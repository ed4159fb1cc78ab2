"""Grid search over the hybrid's (C, psi, gamma), ranked by CC p-value.

Each grid point runs the full rolling backtest over the tuning period; the
point with the highest conditional-coverage p-value wins. Ties prefer the
more regularized model: smaller C, then smaller gamma, then larger psi.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .backtest import run_backtest
from .errors import AllPointsFailed, VarcastError
from .models import HybridForecaster
from .timeseries import ReturnSeries, WindowPlan


@dataclass(frozen=True)
class Grid:
    """Hyperparameter grid; defaults follow the decade/decile study grid."""

    C_values: tuple = tuple(10.0**k for k in range(-4, 5))
    psi_values: tuple = tuple(round(0.1 * k, 1) for k in range(10))
    gamma_values: tuple = tuple(10.0**k for k in range(-4, 5))

    def __post_init__(self):
        object.__setattr__(self, "C_values", tuple(float(c) for c in self.C_values))
        object.__setattr__(self, "psi_values", tuple(float(p) for p in self.psi_values))
        object.__setattr__(self, "gamma_values", tuple(float(g) for g in self.gamma_values))
        if not (self.C_values and self.psi_values and self.gamma_values):
            raise ValueError("grid axes must be nonempty")
        if any(c <= 0 for c in self.C_values) or any(g <= 0 for g in self.gamma_values):
            raise ValueError("C and gamma must be positive")
        if any(not 0.0 <= p < 1.0 for p in self.psi_values):
            raise ValueError("psi must lie in [0, 1)")

    def points(self) -> list[tuple[float, float, float]]:
        return [
            (c, p, g)
            for c in self.C_values
            for p in self.psi_values
            for g in self.gamma_values
        ]


@dataclass(frozen=True)
class GridPointResult:
    C: float
    psi: float
    gamma: float
    violation_rate: float = float("nan")
    p_uc: float = float("nan")
    p_ind: float = float("nan")
    p_cc: float = float("nan")
    n_forecasts: int = 0
    failed: bool = False
    error: str = ""


@dataclass
class TuningResult:
    """Evaluated grid, ranked by p_cc descending with deterministic ties."""

    ranked: list
    failed: list

    @property
    def chosen(self) -> GridPointResult:
        return self.ranked[0]


def _rank_key(r: GridPointResult):
    return (-r.p_cc, r.C, r.gamma, -r.psi)


def _journal_key(alpha: float, c: float, psi: float, gamma: float) -> str:
    return f"{alpha!r}|{c!r}|{psi!r}|{gamma!r}"


def _load_journal(path: str) -> dict:
    done = {}
    if path and os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                key = rec.pop("key")
                done[key] = GridPointResult(**rec)
    return done


def grid_search(
    tuning_series: ReturnSeries,
    grid: Grid,
    plan: WindowPlan,
    alpha: float,
    orders=(0, 0, 1, 1),
    n_jobs: int = 1,
    journal_path: str | None = None,
    model_factory=None,
) -> TuningResult:
    """Evaluate every grid point over the tuning period.

    Points whose model fails (for example a tube so wide that the residual
    pipeline degenerates) are recorded as failed and excluded from the
    ranking. An on-disk journal, when given, makes reruns skip completed
    points. ``model_factory(C, psi, gamma)`` defaults to the hybrid.
    """
    points = grid.points()
    done = _load_journal(journal_path) if journal_path else {}
    if model_factory is None:
        model_factory = lambda c, psi, g: HybridForecaster(C=c, gamma=g, psi=psi, orders=orders)

    def evaluate(point) -> GridPointResult:
        c, psi, g = point
        key = _journal_key(alpha, c, psi, g)
        if key in done:
            return done[key]
        model = model_factory(c, psi, g)
        try:
            run = run_backtest(
                tuning_series, [("hybrid", model)], plan, alpha, run_spa=False
            )["hybrid"]
            return GridPointResult(
                C=c,
                psi=psi,
                gamma=g,
                violation_rate=run.tests.violation_rate,
                p_uc=run.tests.p_uc,
                p_ind=run.tests.p_ind,
                p_cc=run.tests.p_cc,
                n_forecasts=int(run.forecasts.size),
            )
        except VarcastError as exc:
            return GridPointResult(C=c, psi=psi, gamma=g, failed=True, error=str(exc))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(evaluate, points))
    else:
        results = [evaluate(pt) for pt in points]

    if journal_path:
        with open(journal_path, "w", encoding="utf-8") as fh:
            for res in results:
                rec = asdict(res)
                rec["key"] = _journal_key(alpha, res.C, res.psi, res.gamma)
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    ok = [r for r in results if not r.failed]
    bad = [r for r in results if r.failed]
    if not ok:
        raise AllPointsFailed(f"all {len(points)} grid points failed")
    ok.sort(key=_rank_key)
    return TuningResult(ranked=ok, failed=bad)
