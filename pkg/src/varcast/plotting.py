"""Static SVG rendering of forecast series: returns, VaR bounds, violations.

Hand-rolled SVG 1.1 output keeps the files dependency-free, diffable and
byte-deterministic for a given input.
"""
from __future__ import annotations

from .errors import DataError

_PALETTE = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 960, 480
_ML, _MR, _MT, _MB = 60, 20, 20, 40


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _polyline(xs, ys, color, width=1.0, dash=None) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash_attr} '
        f'points="{pts}"/>'
    )


def forecast_svg(forecasts: list[dict]) -> str:
    """Render one or more forecast series (as read from forecast CSVs).

    The realized returns come from the first series; each model adds a
    -VaR line and violation markers, plus a legend entry.
    """
    if not forecasts:
        raise DataError("no forecast series to plot")
    base = forecasts[0]
    n = len(base["returns"])
    if n == 0:
        raise DataError("empty forecast series")
    for f in forecasts[1:]:
        if len(f["returns"]) != n:
            raise DataError("forecast series disagree in length")

    ys_all = list(base["returns"])
    for f in forecasts:
        ys_all.extend(-v for v in f["var"])
    lo, hi = min(ys_all), max(ys_all)
    pad = 0.05 * (hi - lo if hi > lo else 1.0)
    lo, hi = lo - pad, hi + pad

    xs = _scale(range(n), 0, max(n - 1, 1), _ML, _W - _MR)
    y_of = lambda vals: _scale(vals, lo, hi, _H - _MB, _MT)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if lo < 0 < hi:
        (y0,) = y_of([0.0])
        parts.append(_polyline([_ML, _W - _MR], [y0, y0], "#cccccc", 0.8))
    parts.append(_polyline(xs, y_of(base["returns"]), "#555555", 0.8))

    legend = [("returns", "#555555")]
    for k, f in enumerate(forecasts):
        color = _PALETTE[k % len(_PALETTE)]
        neg_var = [-v for v in f["var"]]
        parts.append(_polyline(xs, y_of(neg_var), color, 1.2))
        for i, flag in enumerate(f.get("violation", [])):
            if flag:
                (cy,) = y_of([f["returns"][i]])
                parts.append(
                    f'<circle cx="{xs[i]:.2f}" cy="{cy:.2f}" r="3" fill="{color}" '
                    f'fill-opacity="0.7"/>'
                )
        legend.append((f["model"], color))

    for k, (label, color) in enumerate(legend):
        y = _MT + 14 + 16 * k
        parts.append(_polyline([_ML + 8, _ML + 28], [y - 4, y - 4], color, 2.0))
        parts.append(
            f'<text x="{_ML + 34}" y="{y}" font-family="sans-serif" font-size="12" '
            f'fill="#222222">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_forecast_svg(path, forecasts: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(forecast_svg(forecasts))
