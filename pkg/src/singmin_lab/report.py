"""CSV and SVG output.

Floats are written with 17 significant digits so every value round-trips
exactly; SVG plots are rendered from the same rows, nothing else.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

__all__ = ["format_value", "csv_text", "write_csv", "read_csv", "svg_plot"]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 50
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _ticks(lo, hi, log):
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    return list(np.linspace(lo, hi, 5))


def svg_plot(series: dict[str, tuple], title: str = "", xlabel: str = "", ylabel: str = "", logx=True, logy=True) -> str:
    """Line plot of ``{label: (xs, ys)}``; non-positive points are dropped on log axes."""
    cleaned = {}
    for label, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(float(x)) and math.isfinite(float(y))]
        pts = [(x, y) for x, y in pts if (x > 0 or not logx) and (y > 0 or not logy)]
        if pts:
            cleaned[label] = pts
    fx = math.log10 if logx else (lambda v: v)
    fy = math.log10 if logy else (lambda v: v)
    allx = [fx(x) for pts in cleaned.values() for x, _ in pts] or [0.0, 1.0]
    ally = [fy(y) for pts in cleaned.values() for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return _ML + (v - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - y0) / (y1 - y0) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{_W / 2:.1f}" y="{_H - 10}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {_H / 2:.1f})">{ylabel}</text>',
    ]
    for t in _ticks(x0, x1, logx):
        v = fx(t) if logx else t
        if x0 - 1e-9 <= v <= x1 + 1e-9:
            out.append(f'<text x="{px(v):.1f}" y="{_H - _MB + 16}" text-anchor="middle" font-size="11">{t:.3g}</text>')
    for t in _ticks(y0, y1, logy):
        v = fy(t) if logy else t
        if y0 - 1e-9 <= v <= y1 + 1e-9:
            out.append(f'<text x="{_ML - 6}" y="{py(v) + 4:.1f}" text-anchor="end" font-size="11">{t:.3g}</text>')
    for i, (label, pts) in enumerate(cleaned.items()):
        colour = _COLOURS[i % len(_COLOURS)]
        path = " ".join(f"{px(fx(x)):.2f},{py(fy(y)):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.6" points="{path}"/>')
        out.append(f'<text x="{_W - _MR - 4}" y="{_MT + 14 * (i + 1)}" text-anchor="end" font-size="12" fill="{colour}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
