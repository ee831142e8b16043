"""Minimal static SVG line charts. Output is deterministic for given data."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 150, 40, 50


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def line_chart(series, title="", xlabel="", ylabel=""):
    """Render ``series`` = [(label, xs, ys), ...] as an SVG document string.

    Non-finite points are dropped. Each series gets its own polyline.
    """
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series]) if series else np.array([0.0])
    ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series]) if series else np.array([0.0])
    keep = np.isfinite(xs_all) & np.isfinite(ys_all)
    xs_all, ys_all = (xs_all[keep], ys_all[keep]) if keep.any() else (np.array([0.0]), np.array([0.0]))
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(ys_all.min()), float(ys_all.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _MT + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x0, x1):
        out.append(f'<line x1="{_fmt(sx(tx))}" y1="{_MT + ph}" x2="{_fmt(sx(tx))}" y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(tx))}" y="{_MT + ph + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{tx:.3g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<line x1="{_ML - 5}" y1="{_fmt(sy(ty))}" x2="{_ML}" y2="{_fmt(sy(ty))}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{_fmt(sy(ty) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{ty:.3g}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 16 {_MT + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = [(x, y) for x, y in zip(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
               if math.isfinite(x) and math.isfinite(y)]
        if pts:
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{path}"/>')
        ly = _MT + 14 + 18 * i
        out.append(f'<line x1="{_W - _MR + 10}" y1="{ly}" x2="{_W - _MR + 30}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR + 35}" y="{ly + 4}" font-family="sans-serif" font-size="11">'
                   f'{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series, **kwargs):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(line_chart(series, **kwargs))
