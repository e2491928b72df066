"""Minimal SVG 1.1 line plots: axes, optional log-scale y, legend."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
DASHES = {"solid": "", "dashed": "6,4", "dotted": "2,3"}


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    style: str = "solid"
    markers: bool = False
    color: str | None = None


@dataclass
class Plot:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    log_y: bool = False
    series: list[Series] = field(default_factory=list)
    vlines: list[tuple[float, str]] = field(default_factory=list)
    width: int = 640
    height: int = 440


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def render(plot: Plot) -> str:
    W, H = plot.width, plot.height
    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = W - left - right, H - top - bottom

    def ty(v: float) -> float | None:
        if not math.isfinite(v) or (plot.log_y and v <= 0):
            return None
        return math.log10(v) if plot.log_y else v

    xs = [x for s in plot.series for x in s.x if math.isfinite(x)]
    ys = [t for s in plot.series for y in s.y if (t := ty(y)) is not None]
    xs += [x for x, _ in plot.vlines]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(t: float) -> float:
        return top + (1 - (t - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _nice_ticks(x0, x1):
        X = px(v)
        out.append(f'<line x1="{_fmt(X)}" y1="{top + ph}" x2="{_fmt(X)}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{top + ph + 18}" text-anchor="middle">{_fmt(v)}</text>')
    if plot.log_y:
        yt = [float(k) for k in range(math.ceil(y0), math.floor(y1) + 1)] or _nice_ticks(y0, y1)
        labels = [f"1e{int(k)}" if float(k).is_integer() else _fmt(10**k) for k in yt]
    else:
        yt = _nice_ticks(y0, y1)
        labels = [_fmt(v) for v in yt]
    for v, lab in zip(yt, labels):
        Y = py(v)
        out.append(f'<line x1="{left - 5}" y1="{_fmt(Y)}" x2="{left}" y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{lab}</text>')
    for x, label in plot.vlines:
        X = px(x)
        out.append(
            f'<line x1="{_fmt(X)}" y1="{top}" x2="{_fmt(X)}" y2="{top + ph}" stroke="gray" stroke-dasharray="3,3"/>'
        )
        out.append(f'<text x="{_fmt(X + 3)}" y="{top + 12}" fill="gray">{escape(label)}</text>')
    for k, s in enumerate(plot.series):
        color = s.color or PALETTE[k % len(PALETTE)]
        dash = DASHES.get(s.style, "")
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        run: list[str] = []
        pts = []
        for x, y in zip(s.x, s.y):
            t = ty(y)
            if t is None or not math.isfinite(x):
                if len(run) > 1:
                    out.append(f'<polyline fill="none" stroke="{color}"{dash_attr} points="{" ".join(run)}"/>')
                run = []
                continue
            run.append(f"{_fmt(px(x))},{_fmt(py(t))}")
            pts.append((px(x), py(t)))
        if len(run) > 1:
            out.append(f'<polyline fill="none" stroke="{color}"{dash_attr} points="{" ".join(run)}"/>')
        if s.markers or len(pts) == 1:
            for X, Y in pts:
                out.append(f'<circle cx="{_fmt(X)}" cy="{_fmt(Y)}" r="2.5" fill="{color}"/>')
        ly = top + 14 + 16 * k
        lx = left + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}"{dash_attr}/>')
        out.append(f'<text x="{lx + 25}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(plot.xlabel)}</text>')
    out.append(
        f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {top + ph / 2})">{escape(plot.ylabel)}</text>'
    )
    out.append(f'<text x="{left + pw / 2}" y="22" text-anchor="middle" font-size="14">{escape(plot.title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
