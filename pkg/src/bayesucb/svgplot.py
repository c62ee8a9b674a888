"""Minimal self-contained SVG line charts (axes, polylines, SE bands, legend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    se: np.ndarray | None = None
    dashed: bool = False


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(series: list[Series], title: str = "", xlabel: str = "", ylabel: str = "",
               log_x: bool = False, log_y: bool = False, width: int = 640, height: int = 420) -> str:
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def tx(v):
        return np.log10(v) if log_x else np.asarray(v, dtype=float)

    def ty(v):
        return np.log10(np.maximum(v, 1e-300)) if log_y else np.asarray(v, dtype=float)

    xs = np.concatenate([tx(s.x) for s in series]) if series else np.array([0.0, 1.0])
    ys_parts = []
    for s in series:
        ys_parts.append(ty(s.y))
        if s.se is not None:
            ys_parts += [ty(s.y - s.se), ty(s.y + s.se)]
    ys = np.concatenate(ys_parts) if ys_parts else np.array([0.0, 1.0])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = (float(np.min(ys)), float(np.max(ys))) if ys.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return left + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (ty(v) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        xp = left + (t - x0) / (x1 - x0) * pw
        label = _fmt(10**t) if log_x else _fmt(t)
        out.append(f'<line x1="{xp:.1f}" y1="{top + ph}" x2="{xp:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{xp:.1f}" y="{top + ph + 18}" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1):
        yp = top + ph - (t - y0) / (y1 - y0) * ph
        label = _fmt(10**t) if log_y else _fmt(t)
        out.append(f'<line x1="{left - 5}" y1="{yp:.1f}" x2="{left}" y2="{yp:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{yp + 4:.1f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16 {top + ph / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        x = px(s.x)
        if s.se is not None and np.any(s.se > 0):
            upper = py(s.y + s.se)
            lower = py(s.y - s.se)
            pts = [f"{a:.2f},{b:.2f}" for a, b in zip(x, upper)]
            pts += [f"{a:.2f},{b:.2f}" for a, b in zip(x[::-1], lower[::-1])]
            out.append(f'<polygon points="{" ".join(pts)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        y = py(s.y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y) if np.isfinite(b))
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        ly = top + 10 + 18 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
