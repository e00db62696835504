"""Static SVG charts: data polyline, model curve, band polygon, tc rule.

No external plotting dependency — the documents are small, diffable, and
byte-stable: all coordinates are emitted with fixed two-decimal precision
and nothing depends on wall-clock state.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .model import evaluate
from .scenario import Scenario
from .series import TimeSeries, offset_date

_FONT = 'font-family="DejaVu Sans, Helvetica, sans-serif"'


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_step(raw: float) -> float:
    if raw <= 0 or not math.isfinite(raw):
        return 1.0
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * power:
            return mult * power
    return 10.0 * power


def _y_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    step = _nice_step((hi - lo) / max(target - 1, 1))
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(v)
        v += step
    return ticks


def render_chart(
    series: TimeSeries | None = None,
    scenario: Scenario | None = None,
    *,
    title: str | None = None,
    width: int = 900,
    height: int = 480,
) -> str:
    """Render a price series and/or a fitted scenario as an SVG document."""
    if series is None and scenario is None:
        raise ValueError("nothing to draw: need a series and/or a scenario")

    t_lo, t_hi = math.inf, -math.inf
    v_lo, v_hi = math.inf, -math.inf
    if series is not None:
        t_lo, t_hi = min(t_lo, series.t_start), max(t_hi, series.t_end)
        v_lo, v_hi = min(v_lo, series.value.min()), max(v_hi, series.value.max())
    if scenario is not None:
        curve = scenario.curve
        t_lo, t_hi = min(t_lo, curve.t[0]), max(t_hi, curve.t[-1])
        v_lo = min(v_lo, scenario.band_low.min())
        v_hi = max(v_hi, scenario.band_high.max())
        # keep the critical-time rule in frame, with a little air after it
        t_hi = max(t_hi, scenario.fit.params.tc + 0.02 * (t_hi - t_lo))
    if t_hi <= t_lo:
        t_hi = t_lo + 1.0
    pad = 0.05 * (v_hi - v_lo) or 1.0
    v_lo, v_hi = v_lo - pad, v_hi + pad

    left, right, top, bottom = 64, 16, 42 if title else 16, 36
    plot_w, plot_h = width - left - right, height - top - bottom

    def px(t: float) -> float:
        return left + (t - t_lo) / (t_hi - t_lo) * plot_w

    def py(v: float) -> float:
        return top + (v_hi - v) / (v_hi - v_lo) * plot_h

    def polyline_points(ts: np.ndarray, vs: np.ndarray) -> str:
        return " ".join(f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in zip(ts, vs))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(width / 2)}" y="24" text-anchor="middle" {_FONT} '
            f'font-size="15">{escape(title)}</text>'
        )

    # gridlines and axis labels
    for v in _y_ticks(v_lo, v_hi):
        y = _fmt(py(v))
        parts.append(
            f'<line x1="{left}" y1="{y}" x2="{left + plot_w}" y2="{y}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'{_FONT} font-size="11" fill="#444444">{v:g}</text>'
        )
    n_xticks = 6
    for i in range(n_xticks):
        t = round(t_lo + i * (t_hi - t_lo) / (n_xticks - 1))
        x = _fmt(px(t))
        parts.append(
            f'<line x1="{x}" y1="{top}" x2="{x}" y2="{top + plot_h}" '
            f'stroke="#eeeeee" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x}" y="{top + plot_h + 16}" text-anchor="middle" {_FONT} '
            f'font-size="11" fill="#444444">{offset_date(t).isoformat()}</text>'
        )

    if scenario is not None:
        curve = scenario.curve
        if scenario.band_halfwidth > 0.0:
            forward = polyline_points(curve.t, scenario.band_high)
            backward = polyline_points(curve.t[::-1], scenario.band_low[::-1])
            parts.append(
                f'<polygon points="{forward} {backward}" fill="#aec6e8" '
                f'fill-opacity="0.45" stroke="none"/>'
            )
    if series is not None:
        parts.append(
            f'<polyline points="{polyline_points(series.t, series.value)}" '
            f'fill="none" stroke="#1f3b70" stroke-width="1.2"/>'
        )
    if scenario is not None:
        curve = scenario.curve
        parts.append(
            f'<polyline points="{polyline_points(curve.t, curve.value)}" '
            f'fill="none" stroke="#a03028" stroke-width="1.6"/>'
        )
        tc = scenario.fit.params.tc
        if t_lo <= tc <= t_hi:
            x = _fmt(px(tc))
            parts.append(
                f'<line x1="{x}" y1="{top}" x2="{x}" y2="{top + plot_h}" '
                f'stroke="#a03028" stroke-width="1.2" stroke-dasharray="6 4"/>'
            )
            parts.append(
                f'<text x="{x}" y="{top - 4}" text-anchor="middle" {_FONT} '
                f'font-size="11" fill="#a03028">tc {scenario.tc_date.isoformat()}</text>'
            )
        for e in scenario.extrema:
            parts.append(
                f'<circle cx="{_fmt(px(e.t))}" cy="{_fmt(py(evaluate(scenario.fit.params, e.t)))}" '
                f'r="3" fill="none" stroke="#a03028" stroke-width="1"/>'
            )

    parts.append(
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
