"""Dependency-free SVG line plots with a log-scaled x axis."""
from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

from .errors import PlotError

WIDTH, HEIGHT, PAD = 640, 400, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _finite(xs, ys, log_y):
    pts = []
    for x, y in zip(xs, ys):
        if x is None or y is None or x <= 0:
            continue
        if not math.isfinite(x) or not math.isfinite(y) or (log_y and y <= 0):
            continue
        pts.append((math.log10(x), math.log10(y) if log_y else y))
    return pts


def render_svg(x: Sequence[float], series: Mapping[str, Sequence[float]],
               reference: Optional[float] = None, log_y: bool = False,
               title: str = "", x_label: str = "n", y_label: str = "") -> str:
    """One polyline per series; a horizontal <line> for the reference value."""
    curves = {name: _finite(x, ys, log_y) for name, ys in series.items()}
    if not curves or min(len(p) for p in curves.values()) < 2:
        raise PlotError("a curve needs at least two plottable points")
    allx = [p[0] for pts in curves.values() for p in pts]
    ally = [p[1] for pts in curves.values() for p in pts]
    if reference is not None:
        ally.append(math.log10(reference) if log_y else reference)
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return PAD + (v - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
           f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" '
           f'height="{HEIGHT - 2 * PAD}" fill="none" stroke="#444"/>']
    ticks = []
    for e in range(math.ceil(x0), math.floor(x1) + 1):
        px = sx(e)
        ticks.append(f"M{px:.2f},{HEIGHT - PAD} v6")
        out.append(f'<text x="{px:.2f}" y="{HEIGHT - PAD + 20}" font-size="11" '
                   f'text-anchor="middle">1e{e}</text>')
    if ticks:
        out.append(f'<path d="{" ".join(ticks)}" stroke="#444"/>')
    for v in (y0, y1):
        label = f"{10 ** v:.3g}" if log_y else f"{v:.3g}"
        out.append(f'<text x="{PAD - 6}" y="{sy(v) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{label}</text>')
    for i, (name, pts) in enumerate(curves.items()):
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" '
                   f'stroke-width="1.5" points="{coords}"><title>{name}</title>'
                   f'</polyline>')
    if reference is not None:
        ry = sy(math.log10(reference) if log_y else reference)
        out.append(f'<line x1="{PAD}" y1="{ry:.2f}" x2="{WIDTH - PAD}" '
                   f'y2="{ry:.2f}" stroke="#000" stroke-dasharray="6,4"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="{PAD / 2}" font-size="14" '
                   f'text-anchor="middle">{title}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" '
               f'text-anchor="middle">{x_label}</text>')
    if y_label:
        out.append(f'<text x="14" y="{HEIGHT / 2}" font-size="12" '
                   f'transform="rotate(-90 14 {HEIGHT / 2})" '
                   f'text-anchor="middle">{y_label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(x, series, path, **kwargs) -> None:
    svg = render_svg(x, series, **kwargs)
    with open(path, "w", newline="\n") as fh:
        fh.write(svg)
