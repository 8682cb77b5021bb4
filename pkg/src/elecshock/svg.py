"""Dependency-free SVG impulse-response charts with nested confidence bands."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=55)


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = np.ceil(lo / step) * step
    return [round(v, 10) for v in np.arange(first, hi + step * 0.5, step) if v <= hi + 1e-12]


def render_irf_svg(ir, title: str = "", xlabel: str = "Business days", ylabel: str = "Percent",
                   comment: str = "") -> str:
    """One panel: 90% band (light), 68% band (dark), point estimates, zero line."""
    h = np.asarray(ir.horizons, dtype=float)
    lo90, hi90 = ir.bands[0.90]
    lo68, hi68 = ir.bands[0.68]
    ymin = float(min(np.nanmin(lo90), np.nanmin(ir.coef), 0.0))
    ymax = float(max(np.nanmax(hi90), np.nanmax(ir.coef), 0.0))
    pad = 0.05 * (ymax - ymin or 1.0)
    ymin, ymax = ymin - pad, ymax + pad
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    hmax = max(float(h[-1]), 1.0)

    def px(v):
        return x0 + (x1 - x0) * v / hmax

    def py(v):
        return y0 - (y0 - y1) * (v - ymin) / (ymax - ymin)

    def poly(lo, hi):
        pts = [(px(a), py(b)) for a, b in zip(h, hi)] + [(px(a), py(b)) for a, b in zip(h[::-1], lo[::-1])]
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)

    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    if comment:
        out.append(f"<!-- {escape(comment.replace('--', '- -'))} -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(f'<polygon points="{poly(lo90, hi90)}" fill="#c6d4e6" stroke="none"/>')
    out.append(f'<polygon points="{poly(lo68, hi68)}" fill="#7f9cc4" stroke="none"/>')
    out.append(f'<line x1="{x0}" y1="{py(0):.2f}" x2="{x1}" y2="{py(0):.2f}" stroke="#888" '
               f'stroke-dasharray="4,3"/>')
    line = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(h, ir.coef))
    out.append(f'<polyline points="{line}" fill="none" stroke="black" stroke-width="2"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for v in _ticks(ymin, ymax):
        out.append(f'<line x1="{x0 - 4}" y1="{py(v):.2f}" x2="{x0}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 7}" y="{py(v) + 4:.2f}" text-anchor="end">{v:g}</text>')
    for v in _ticks(0.0, hmax):
        out.append(f'<line x1="{px(v):.2f}" y1="{y0}" x2="{px(v):.2f}" y2="{y0 + 4}" stroke="black"/>')
        out.append(f'<text x="{px(v):.2f}" y="{y0 + 17}" text-anchor="middle">{v:g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
