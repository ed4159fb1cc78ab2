"""Run configuration: one JSON document, hashed for reproducibility stamps."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date, datetime

from .errors import ConfigError
from .models import benchmark_names
from .timeseries import ColumnSpec, WindowPlan

DEFAULT_ALPHAS = (0.01, 0.025, 0.05)
DEFAULT_HORIZONS = (1, 10)


@dataclass(frozen=True)
class BlockSpec:
    """Date range of forecast targets (training data may reach earlier)."""

    start: date | None = None
    end: date | None = None


@dataclass
class RunConfig:
    data_path: str
    columns: ColumnSpec
    alphas: tuple
    horizons: tuple
    plan: WindowPlan
    models: tuple
    hybrid_params: dict
    tuning_file: str | None
    grid: dict
    tuning_block: BlockSpec
    forecast_block: BlockSpec
    seed: int
    output_dir: str
    n_boot: int
    block_q: float
    raw: dict
    orders: tuple = (0, 0, 1, 1)

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _parse_date(value, label: str) -> date | None:
    if value is None:
        return None
    try:
        return datetime.strptime(value, "%Y-%m-%d").date()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: expected YYYY-MM-DD, got {value!r}") from exc


def _parse_block(raw: dict | None, label: str) -> BlockSpec:
    raw = raw or {}
    return BlockSpec(
        start=_parse_date(raw.get("start"), f"{label}.start"),
        end=_parse_date(raw.get("end"), f"{label}.end"),
    )


def load_config(path: str) -> RunConfig:
    """Parse and validate the JSON run configuration."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    data = raw.get("data")
    if not isinstance(data, dict) or "path" not in data:
        raise ConfigError("config needs data.path")
    columns = ColumnSpec(
        date_column=data.get("date_column", "date"),
        price_column=data.get("price_column", "adjclose"),
        date_format=data.get("date_format", "%Y-%m-%d"),
        delimiter=data.get("delimiter", ","),
    )

    alphas = tuple(float(a) for a in raw.get("alphas", DEFAULT_ALPHAS))
    if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
        raise ConfigError("alphas must be a nonempty list inside (0, 1)")
    horizons = tuple(int(h) for h in raw.get("horizons", DEFAULT_HORIZONS))
    if not horizons or any(h < 1 for h in horizons):
        raise ConfigError("horizons must be positive integers")

    window = raw.get("window", {})
    try:
        plan = WindowPlan(
            window_len=int(window.get("length", 251)), step=int(window.get("step", 1))
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad window plan: {exc}") from exc

    models = tuple(raw.get("models", ["hybrid", *benchmark_names()]))
    if not models:
        raise ConfigError("model roster must be nonempty")

    hybrid = dict(raw.get("hybrid", {}))
    tuning_file = hybrid.pop("from_tuning", None)
    for key in hybrid:
        if key not in ("C", "gamma", "psi"):
            raise ConfigError(f"unknown hybrid parameter {key!r}")
    orders = tuple(int(v) for v in raw.get("orders", (0, 0, 1, 1)))
    if len(orders) != 4 or min(orders) < 0:
        raise ConfigError("orders must be four nonnegative integers")

    grid_raw = raw.get("grid", {})
    try:
        grid = {
            "C_values": tuple(float(v) for v in grid_raw["C"]) if "C" in grid_raw else None,
            "psi_values": tuple(float(v) for v in grid_raw["psi"]) if "psi" in grid_raw else None,
            "gamma_values": tuple(float(v) for v in grid_raw["gamma"])
            if "gamma" in grid_raw
            else None,
        }
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid values: {exc}") from exc
    grid = {k: v for k, v in grid.items() if v is not None}

    spa = raw.get("spa", {})
    seed = int(raw.get("seed", 0))
    return RunConfig(
        data_path=data["path"],
        columns=columns,
        alphas=alphas,
        horizons=horizons,
        plan=plan,
        models=models,
        hybrid_params=hybrid,
        tuning_file=tuning_file,
        grid=grid,
        tuning_block=_parse_block(raw.get("tuning_block"), "tuning_block"),
        forecast_block=_parse_block(raw.get("forecast_block"), "forecast_block"),
        seed=seed,
        output_dir=raw.get("output_dir", "out"),
        n_boot=int(spa.get("n_boot", 1000)),
        block_q=float(spa.get("block_q", 0.1)),
        raw=raw,
        orders=orders,
    )
