"""Command-line front end: stats, tune, backtest, spa, report, plot.

Exit codes: 0 success, 1 usage/config problem, 2 data problem, 3 numerical
failure.
"""
from __future__ import annotations

import os
import sys

import click
import numpy as np

from .backtest import ModelRun, christoffersen, lopez_loss, run_backtest, spa_test, violations
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, NumericalError, VarcastError
from .models import make_model
from .plotting import write_forecast_svg
from .report import (
    read_forecast_csv,
    write_forecast_csv,
    write_report_csv,
    write_report_json,
    write_stats_table,
    write_tuning_csv,
)
from .timeseries import (
    ReturnSeries,
    WindowPlan,
    descriptive_stats,
    load_prices,
    log_returns,
    restrict_to_targets,
)
from .tuning import Grid, grid_search


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="Run config JSON.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "out_dir", type=str, default=None, help="Override the output directory.")
@click.option("--threads", type=int, default=1, show_default=True, help="Worker threads.")
@click.pass_context
def cli(ctx, config_path, seed, out_dir, threads):
    """Value-at-Risk forecasting toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(config_path=config_path, seed=seed, out_dir=out_dir, threads=threads)


def _load(ctx) -> RunConfig:
    path = ctx.obj.get("config_path")
    if not path:
        raise ConfigError("this command needs --config PATH")
    cfg = load_config(path)
    if ctx.obj.get("seed") is not None:
        cfg.seed = ctx.obj["seed"]
    if ctx.obj.get("out_dir"):
        cfg.output_dir = ctx.obj["out_dir"]
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg


def _returns(cfg: RunConfig) -> ReturnSeries:
    return log_returns(load_prices(cfg.data_path, cfg.columns))


def _block(series: ReturnSeries, plan: WindowPlan, block) -> ReturnSeries:
    if block.start is None and block.end is None:
        return series
    return restrict_to_targets(series, plan, block.start, block.end)


def _tag(alpha: float, horizon: int) -> str:
    return f"{alpha:g}_{horizon}d"


@cli.command()
@click.pass_context
def stats(ctx):
    """Descriptive statistics of the log returns (values x100)."""
    cfg = _load(ctx)
    rets = _returns(cfg)
    name = os.path.splitext(os.path.basename(cfg.data_path))[0]
    row = {"name": name, **descriptive_stats(rets.returns * 100.0)}
    out_csv = os.path.join(cfg.output_dir, "stats.csv")
    click.echo(write_stats_table([row], out=out_csv))
    click.echo(f"written: {out_csv}")


@cli.command()
@click.pass_context
def tune(ctx):
    """Grid-search the hybrid's (C, psi, gamma) per alpha on the tuning block."""
    cfg = _load(ctx)
    rets = _returns(cfg)
    grid = Grid(**cfg.grid)
    import json

    chosen: dict = {}
    for alpha in cfg.alphas:
        series = _block(rets, cfg.plan, cfg.tuning_block)
        journal = os.path.join(cfg.output_dir, f"tuning_journal_{alpha:g}.jsonl")
        result = grid_search(
            series,
            grid,
            cfg.plan,
            alpha,
            orders=cfg.orders,
            n_jobs=ctx.obj["threads"],
            journal_path=journal,
        )
        out_csv = os.path.join(cfg.output_dir, f"tuning_{alpha:g}.csv")
        write_tuning_csv(out_csv, result, alpha, cfg.config_hash, cfg.seed)
        top = result.chosen
        chosen[f"{alpha:g}"] = {"C": top.C, "psi": top.psi, "gamma": top.gamma}
        click.echo(
            f"alpha={alpha:g}: chose C={top.C:g} psi={top.psi:g} gamma={top.gamma:g} "
            f"(CC p={top.p_cc:.4f}); {len(result.failed)} failed points -> {out_csv}"
        )
    chosen_path = os.path.join(cfg.output_dir, "chosen_params.json")
    with open(chosen_path, "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.config_hash, "params": chosen}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    click.echo(f"written: {chosen_path}")


def _hybrid_params_for(cfg: RunConfig, alpha: float) -> dict:
    params = dict(cfg.hybrid_params)
    if cfg.tuning_file:
        import json

        try:
            with open(cfg.tuning_file, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read tuning file {cfg.tuning_file}: {exc}") from exc
        by_alpha = doc.get("params", doc)
        key = f"{alpha:g}"
        if key not in by_alpha:
            raise ConfigError(f"tuning file has no parameters for alpha={key}")
        params.update(by_alpha[key])
    return params


@cli.command()
@click.pass_context
def backtest(ctx):
    """Run the model roster over the forecast block per alpha and horizon."""
    cfg = _load(ctx)
    rets = _returns(cfg)
    for horizon in cfg.horizons:
        plan = WindowPlan(cfg.plan.window_len, cfg.plan.step, horizon)
        for alpha in cfg.alphas:
            series = _block(rets, plan, cfg.forecast_block)
            models = [
                (
                    name,
                    make_model(
                        name,
                        hybrid_params={
                            **_hybrid_params_for(cfg, alpha),
                            "orders": cfg.orders,
                        },
                    ),
                )
                for name in cfg.models
            ]
            runs = run_backtest(
                series,
                models,
                plan,
                alpha,
                seed=cfg.seed,
                n_boot=cfg.n_boot,
                block_q=cfg.block_q,
                n_jobs=ctx.obj["threads"],
            )
            tag = _tag(alpha, horizon)
            report_csv = os.path.join(cfg.output_dir, f"report_{tag}.csv")
            write_report_csv(report_csv, list(runs.values()), cfg.config_hash, cfg.seed)
            write_report_json(
                os.path.join(cfg.output_dir, f"report_{tag}.json"),
                list(runs.values()),
                cfg.config_hash,
                cfg.seed,
                meta={"alpha": alpha, "horizon": horizon},
            )
            for run in runs.values():
                write_forecast_csv(
                    os.path.join(cfg.output_dir, f"forecasts_{run.name}_{tag}.csv"),
                    run,
                    series.dates,
                    cfg.config_hash,
                    cfg.seed,
                    alpha,
                    horizon,
                )
            click.echo(f"alpha={alpha:g} horizon={horizon}: {report_csv}")


def _runs_from_files(paths) -> tuple[list[dict], float]:
    docs = [read_forecast_csv(p) for p in paths]
    dates = docs[0]["dates"]
    for doc in docs[1:]:
        if doc["dates"] != dates:
            raise DataError("forecast files cover different target dates")
    alphas = {doc["alpha"] for doc in docs if doc["alpha"] is not None}
    if len(alphas) > 1:
        raise DataError(f"forecast files mix alpha levels: {sorted(alphas)}")
    alpha = alphas.pop() if alphas else 0.05
    return docs, alpha


def _rebuild_run(doc: dict, alpha: float) -> ModelRun:
    r = np.asarray(doc["returns"], dtype=float)
    f = np.asarray(doc["var"], dtype=float)
    v = violations(r, f, alpha)
    return ModelRun(
        name=doc["model"],
        target_indices=np.arange(r.size),
        realized=r,
        forecasts=f,
        violation_series=v,
        tests=christoffersen(v),
        losses=lopez_loss(r, f, alpha),
        n_skipped=0,
    )


@cli.command()
@click.argument("forecast_csvs", nargs=-1, required=True)
@click.option("--n-boot", type=int, default=1000, show_default=True)
@click.option("--block-q", type=float, default=0.1, show_default=True)
@click.pass_context
def spa(ctx, forecast_csvs, n_boot, block_q):
    """Superior-predictive-ability test across stored forecast series."""
    if len(forecast_csvs) < 2:
        raise ConfigError("spa needs at least two forecast CSVs")
    docs, alpha = _runs_from_files(forecast_csvs)
    seed = ctx.obj.get("seed") or 0
    losses = np.column_stack(
        [
            lopez_loss(np.asarray(d["returns"], dtype=float), np.asarray(d["var"], dtype=float), alpha)
            for d in docs
        ]
    )
    click.echo("benchmark,t_stat,p_value")
    for j, doc in enumerate(docs):
        res = spa_test(losses, j, n_boot=n_boot, block_q=block_q, seed=seed)
        click.echo(f"{doc['model']},{res.t_stat!r},{res.p_value!r}")


@cli.command()
@click.argument("forecast_csvs", nargs=-1, required=True)
@click.option("--output", "-o", type=str, default=None, help="Report CSV path.")
@click.pass_context
def report(ctx, forecast_csvs, output):
    """Rebuild the ranked report table from stored forecast series."""
    docs, alpha = _runs_from_files(forecast_csvs)
    seed = ctx.obj.get("seed") or 0
    runs = [_rebuild_run(doc, alpha) for doc in docs]
    if len(runs) >= 2:
        losses = np.column_stack([run.losses for run in runs])
        for j, run in enumerate(runs):
            run.spa = spa_test(losses, j, seed=seed)
    out_path = output or os.path.join(ctx.obj.get("out_dir") or ".", "report_rebuilt.csv")
    write_report_csv(out_path, runs, "rebuilt", seed)
    with open(out_path, "r", encoding="utf-8") as fh:
        click.echo(fh.read().rstrip())


@cli.command()
@click.argument("forecast_csvs", nargs=-1, required=True)
@click.option("--output", "-o", type=str, required=True, help="SVG output path.")
def plot(forecast_csvs, output):
    """Render returns, VaR bound(s) and violation markers to an SVG file."""
    docs = [read_forecast_csv(p) for p in forecast_csvs]
    write_forecast_svg(output, docs)
    click.echo(f"written: {output}")


def main(argv=None) -> int:
    try:
        cli(args=argv, standalone_mode=False, obj={})
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    except VarcastError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except click.exceptions.Abort:
        return 1


if __name__ == "__main__":
    sys.exit(main())
