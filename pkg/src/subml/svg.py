"""Minimal line-chart writer emitting standalone SVG (no plotting library)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence
from xml.sax.saxutils import escape

__all__ = ["Series", "line_chart"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")
_DASHES = ("", "6,4", "2,3", "8,3,2,3")


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 6) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        if t >= lo - 1e-9 * step:
            ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v: float, logy: bool) -> str:
    if logy:
        return f"1e{int(round(v))}"
    return f"{v:g}"


def line_chart(series: Sequence[Series], title: str, xlabel: str, ylabel: str,
               logy: bool = False, width: int = 640, height: int = 440,
               ylim: tuple | None = None) -> str:
    """Render ``series`` as an SVG document string.

    On a log axis, non-positive values are dropped from the polyline.
    """
    left, right, top, bottom = 80, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom

    pts = []
    for s in series:
        row = []
        for x, y in zip(s.x, s.y):
            if logy:
                if y is None or not y > 0:
                    continue
                y = math.log10(y)
            row.append((float(x), float(y)))
        pts.append(row)

    xs = [p[0] for row in pts for p in row] or [0.0, 1.0]
    ys = [p[1] for row in pts for p in row] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1.0
    if ylim is not None:
        y0, y1 = ylim
        if logy:
            y0, y1 = math.log10(y0), math.log10(y1)
    elif logy:
        y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
    else:
        y0, y1 = min(0.0, min(ys)), max(ys)
    if y1 == y0:
        y1 = y0 + 1.0

    sx = lambda v: left + (v - x0) / (x1 - x0) * pw
    sy = lambda v: top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">'
        f'{escape(title)}</text>',
    ]
    yt = (list(range(int(y0), int(y1) + 1)) if logy else _nice_ticks(y0, y1))
    for t in yt:
        y = sy(t)
        out.append(f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + pw}" y2="{_fmt(y)}" '
                   f'stroke="#e0e0e0"/>')
        out.append(f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end">'
                   f'{_tick_label(t, logy)}</text>')
    for t in _nice_ticks(x0, x1):
        x = sx(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{top}" x2="{_fmt(x)}" y2="{top + ph}" '
                   f'stroke="#e0e0e0"/>')
        out.append(f'<text x="{_fmt(x)}" y="{top + ph + 18}" text-anchor="middle">'
                   f'{t:g}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
               f'stroke="black"/>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(ylabel)}</text>')

    for i, (s, row) in enumerate(zip(series, pts)):
        color = _COLORS[i % len(_COLORS)]
        dash = _DASHES[i % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        if row:
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in row)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                       f'stroke-width="2"{dash_attr}/>')
            for x, y in row:
                out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" '
                           f'fill="{color}"/>')
        ly = top + 16 + 18 * i
        lx = left + pw - 170
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
