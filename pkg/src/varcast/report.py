"""Report and forecast-series files: CSV with a reproducibility stamp.

Every file starts with a ``#`` comment line embedding the package version,
the config hash and the seed, so identical configs produce byte-identical
outputs. Percentage columns are module-level values times 100, written at
full precision.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict

from . import __version__
from .backtest import ModelRun
from .errors import UnreadableFile
from .tuning import TuningResult


def _stamp(config_hash: str, seed: int) -> str:
    return f"# varcast={__version__} config={config_hash} seed={seed}"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_forecast_csv(
    path, run: ModelRun, dates, config_hash: str, seed: int, alpha: float, horizon: int
) -> None:
    """One row per target day: date, realized return, VaR, violation flag."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            _stamp(config_hash, seed)
            + f" model={run.name} alpha={_fmt(float(alpha))} horizon={horizon}\n"
        )
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "return", "var", "violation"])
        for i in range(run.forecasts.size):
            writer.writerow(
                [
                    dates[int(run.target_indices[i])],
                    _fmt(float(run.realized[i])),
                    _fmt(float(run.forecasts[i])),
                    int(run.violation_series.flags[i]),
                ]
            )


def read_forecast_csv(path) -> dict:
    """Read a forecast CSV back into {model, dates, returns, var, violation}."""
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"cannot open {path}: {exc}") from exc
    model = str(path)
    alpha = None
    horizon = 1
    dates, rets, var, flags = [], [], [], []
    with fh:
        first = fh.readline()
        if first.startswith("#"):
            for token in first.strip().split():
                if token.startswith("model="):
                    model = token.split("=", 1)[1]
                elif token.startswith("alpha="):
                    alpha = float(token.split("=", 1)[1])
                elif token.startswith("horizon="):
                    horizon = int(token.split("=", 1)[1])
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"date", "return", "var"} <= set(reader.fieldnames):
            raise UnreadableFile(f"{path}: expected date/return/var columns")
        for row in reader:
            dates.append(row["date"])
            rets.append(float(row["return"]))
            var.append(float(row["var"]))
            flags.append(int(row.get("violation", 0)))
    if not dates:
        raise UnreadableFile(f"{path}: no forecast rows")
    return {
        "model": model,
        "alpha": alpha,
        "horizon": horizon,
        "dates": dates,
        "returns": rets,
        "var": var,
        "violation": flags,
    }


def write_report_csv(path, runs: list[ModelRun], config_hash: str, seed: int) -> None:
    """Ranked model table (descending CC p-value), all columns in percent."""
    ordered = sorted(runs, key=lambda r: (-r.tests.p_cc, r.name))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_stamp(config_hash, seed) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Model", "Violations", "SPA", "UC", "ID", "CC"])
        for run in ordered:
            spa = run.spa.p_value * 100.0 if run.spa is not None else float("nan")
            writer.writerow(
                [
                    run.name,
                    _fmt(run.tests.violation_rate * 100.0),
                    _fmt(spa),
                    _fmt(run.tests.p_uc * 100.0),
                    _fmt(run.tests.p_ind * 100.0),
                    _fmt(run.tests.p_cc * 100.0),
                ]
            )


def write_report_json(path, runs: list[ModelRun], config_hash: str, seed: int, meta: dict) -> None:
    """Full-detail companion to the ranked CSV."""
    payload = {
        "varcast": __version__,
        "config": config_hash,
        "seed": seed,
        **meta,
        "models": {
            run.name: {
                "n_forecasts": int(run.forecasts.size),
                "n_skipped": run.n_skipped,
                "violation_rate": run.tests.violation_rate,
                "tests": asdict(run.tests),
                "lopez_total": float(run.losses.sum()),
                "spa": None if run.spa is None else asdict(run.spa),
            }
            for run in runs
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_tuning_csv(path, result: TuningResult, alpha: float, config_hash: str, seed: int) -> None:
    """Grid ranking mirroring the tuning table columns, percent scale."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_stamp(config_hash, seed) + f" alpha={_fmt(alpha)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["C", "psi", "gamma", "Violations", "UC", "ID", "CC"])
        for r in result.ranked:
            writer.writerow(
                [
                    _fmt(r.C),
                    _fmt(r.psi),
                    _fmt(r.gamma),
                    _fmt(r.violation_rate * 100.0),
                    _fmt(r.p_uc * 100.0),
                    _fmt(r.p_ind * 100.0),
                    _fmt(r.p_cc * 100.0),
                ]
            )
        for r in result.failed:
            writer.writerow([_fmt(r.C), _fmt(r.psi), _fmt(r.gamma), "failed", "", "", ""])


def write_stats_table(rows: list[dict], out=None) -> str:
    """Aligned-column text table of descriptive statistics (x100 scale)."""
    headers = ["Series", "Q1", "Mean", "Median", "Q3", "Variance", "Skewness", "Kurtosis"]
    keys = ["q1", "mean", "median", "q3", "variance", "skewness", "kurtosis"]
    table = [headers]
    for row in rows:
        table.append([row["name"]] + [f"{row[k]:.4f}" for k in keys])
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    text = "\n".join(
        "  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in table
    )
    if out is not None:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["series"] + keys)
            for row in rows:
                writer.writerow([row["name"]] + [_fmt(row[k]) for k in keys])
    return text
