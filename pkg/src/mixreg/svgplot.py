"""Minimal hand-rolled SVG line plots (log-x), no plotting dependency.

Produces one <polyline> per series plus axes, tick labels, and a legend;
output is plain XML so downstream checks can parse it.
"""

from __future__ import annotations

import math
from pathlib import Path

from .errors import IoError

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_WIDTH, _HEIGHT = 820, 520
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_svg_plot(points_by_series: dict[str, list[tuple[float, float]]],
                  path, title: str = "", y_label: str = "") -> None:
    """Write a log-x line plot; keys are series labels.

    Points with non-finite or non-positive x are dropped (the x axis is
    logarithmic).
    """
    series = {
        label: [(x, y) for x, y in pts
                if x > 0 and math.isfinite(x) and math.isfinite(y)]
        for label, pts in points_by_series.items()
    }
    series = {label: pts for label, pts in series.items() if pts}
    if not series:
        raise IoError("nothing to plot: all series empty")

    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    lx_min, lx_max = math.log10(min(xs)), math.log10(max(xs))
    if lx_max == lx_min:
        lx_min, lx_max = lx_min - 0.5, lx_max + 0.5
    y_min = min(0.0, min(ys))
    y_max = max(ys)
    if y_max == y_min:
        y_max = y_min + 1.0
    y_max *= 1.05

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + plot_w * (math.log10(x) - lx_min) / (lx_max - lx_min)

    def sy(y: float) -> float:
        return _MARGIN_T + plot_h * (1.0 - (y - y_min) / (y_max - y_min))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH / 2}" y="20" text-anchor="middle" '
                     f'font-size="15">{title}</text>')

    # axes
    x0, y0 = _MARGIN_L, _HEIGHT - _MARGIN_B
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{_WIDTH - _MARGIN_R}" '
                 f'y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" '
                 f'stroke="black"/>')

    # decade ticks on the log-x axis
    for e in range(math.floor(lx_min), math.ceil(lx_max) + 1):
        if not (lx_min - 1e-9 <= e <= lx_max + 1e-9):
            continue
        px = sx(10.0 ** e)
        parts.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" '
                     f'y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{y0 + 20}" '
                     f'text-anchor="middle" font-size="12">1e{e}</text>')
    parts.append(f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 8}" '
                 f'text-anchor="middle" font-size="13">lambda (log scale)</text>')

    # five linear ticks on y
    for i in range(6):
        yv = y_min + (y_max - y_min) * i / 5.0
        py = sy(yv)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" '
                     f'y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 9}" y="{_fmt(py + 4)}" '
                     f'text-anchor="end" font-size="12">{_fmt(yv)}</text>')
    if y_label:
        parts.append(f'<text x="16" y="{_MARGIN_T + plot_h / 2}" font-size="13" '
                     f'text-anchor="middle" transform="rotate(-90 16 '
                     f'{_MARGIN_T + plot_h / 2})">{y_label}</text>')

    for idx, (label, pts) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = _MARGIN_T + 16 + 18 * idx
        lx = _WIDTH - _MARGIN_R - 180
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="12">'
                     f'{label}</text>')

    parts.append("</svg>")
    try:
        Path(path).write_text("\n".join(parts), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
