"""Hand-emitted SVG line charts for the CLI.

Deliberately dependency-free: curves are polylines distinguished by dash
pattern (and color as a secondary cue), with simple linear axes.  Output is
deterministic for equal input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import math

PALETTE = ["#1f3b73", "#b23a2f", "#2f7d4f", "#8a6d1f", "#5b3a8a", "#356f7d"]
DASHES = ["", "8 4", "2 3", "8 3 2 3", "12 3", "4 6"]


@dataclass
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]


@dataclass
class Marker:
    label: str
    x: float
    y: float


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    markers: list = field(default_factory=list)
    hlines: list = field(default_factory=list)  # (label, y) pairs
    width: int = 760
    height: int = 500


def _finite_pairs(xs, ys):
    return [
        (float(x), float(y))
        for x, y in zip(xs, ys)
        if math.isfinite(x) and math.isfinite(y)
    ]


def _nice_ticks(lo: float, hi: float, target: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def render(chart: Chart) -> str:
    """Render a chart to an SVG string."""
    pad_l, pad_r, pad_t, pad_b = 64, 16, 36, 46
    plot_w = chart.width - pad_l - pad_r
    plot_h = chart.height - pad_t - pad_b

    pts_all = []
    for s in chart.series:
        pts_all.extend(_finite_pairs(s.xs, s.ys))
    for m in chart.markers:
        if math.isfinite(m.x) and math.isfinite(m.y):
            pts_all.append((m.x, m.y))
    if not pts_all:
        pts_all = [(0.0, 0.0), (1.0, 1.0)]
    xs = [p[0] for p in pts_all]
    ys = [p[1] for p in pts_all] + [y for _, y in chart.hlines]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.07 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return pad_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return pad_t + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{chart.width}" '
        f'height="{chart.height}" viewBox="0 0 {chart.width} {chart.height}">'
    )
    out.append('<rect width="100%" height="100%" fill="white"/>')
    out.append(
        f'<text x="{chart.width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{chart.title}</text>'
    )

    # axes and grid
    for t in _nice_ticks(x_lo + x_pad, x_hi - x_pad):
        px = sx(t)
        out.append(
            f'<line x1="{px:.2f}" y1="{pad_t}" x2="{px:.2f}" '
            f'y2="{pad_t + plot_h}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{pad_t + plot_h + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:.4g}</text>'
        )
    for t in _nice_ticks(y_lo + y_pad, y_hi - y_pad):
        py = sy(t)
        out.append(
            f'<line x1="{pad_l}" y1="{py:.2f}" x2="{pad_l + plot_w}" '
            f'y2="{py:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{pad_l - 6}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{t:.4g}</text>'
        )
    out.append(
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444444" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{pad_l + plot_w / 2:.1f}" y="{chart.height - 10}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f"{chart.xlabel}</text>"
    )
    out.append(
        f'<text x="16" y="{pad_t + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {pad_t + plot_h / 2:.1f})">{chart.ylabel}</text>'
    )

    for label, y in chart.hlines:
        py = sy(y)
        out.append(
            f'<line x1="{pad_l}" y1="{py:.2f}" x2="{pad_l + plot_w}" '
            f'y2="{py:.2f}" stroke="#888888" stroke-width="1" stroke-dasharray="3 3"/>'
        )
        out.append(
            f'<text x="{pad_l + plot_w - 4}" y="{py - 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="#666666">{label}</text>'
        )

    for i, s in enumerate(chart.series):
        pts = _finite_pairs(s.xs, s.ys)
        if not pts:
            continue
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[i % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.6"{dash_attr}/>'
        )

    for m in chart.markers:
        if not (math.isfinite(m.x) and math.isfinite(m.y)):
            continue
        px, py = sx(m.x), sy(m.y)
        out.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3.4" fill="#111111"/>'
        )
        out.append(
            f'<text x="{px + 6:.2f}" y="{py - 6:.2f}" font-family="sans-serif" '
            f'font-size="11">{m.label}</text>'
        )

    # legend
    lx = pad_l + 10
    ly = pad_t + 14
    for i, s in enumerate(chart.series):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[i % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<line x1="{lx}" y1="{ly + 14 * i}" x2="{lx + 26}" y2="{ly + 14 * i}" '
            f'stroke="{color}" stroke-width="1.6"{dash_attr}/>'
        )
        out.append(
            f'<text x="{lx + 32}" y="{ly + 14 * i + 4}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
