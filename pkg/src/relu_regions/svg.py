"""SVG export of a slice's cell complex."""
from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np


@dataclass
class SvgStyle:
    width: int = 600
    fill: str = "gradient"  # or "none"
    stroke: str = "#222"
    stroke_width: float = 0.6
    bar_height: int = 40
    points: np.ndarray | None = None  # slice coordinates, drawn as black dots
    point_radius: float = 3.0
    title: str | None = None


def _fill(cell, style, gmax):
    if style.fill == "none" or cell.output_affine is None:
        return "none"
    g = cell.output_affine[0, :-1]
    if len(g) == 1:
        hue = 0.6 if g[0] >= 0 else 0.05
    else:
        hue = (math.atan2(g[1], g[0]) / (2 * math.pi)) % 1.0
    mag = float(np.linalg.norm(g)) / gmax if gmax > 0 else 0.0
    r, gr, b = colorsys.hls_to_rgb(hue, 0.85 - 0.35 * mag, 0.65)
    return "#%02x%02x%02x" % (int(255 * r), int(255 * gr), int(255 * b))


def render_svg(census, style: SvgStyle | None = None) -> str:
    """One ``<polygon>`` per cell (1-D cells become thin bars); optional data dots."""
    style = style or SvgStyle()
    if census.cells is None:
        raise ValueError("census must retain its cells")
    win = census.window
    lo, hi = win.min(axis=0), win.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    W = style.width
    H = style.bar_height if census.k == 1 else int(round(W * span[1] / span[0]))
    gmax = max((float(np.linalg.norm(c.output_affine[0, :-1])) for c in census.cells
                if c.output_affine is not None), default=0.0)

    def to_px(u):
        u = np.atleast_2d(u)
        x = (u[:, 0] - lo[0]) / span[0] * W
        if census.k == 1:
            return x, np.full_like(x, H / 2)
        return x, H - (u[:, 1] - lo[1]) / span[1] * H

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'viewBox="0 0 {W} {H}">']
    if style.title:
        parts.append(f"<title>{escape(style.title)}</title>")
    for c in census.cells:
        if census.k == 1:
            x0, x1 = (c.vertices[:, 0] - lo[0]) / span[0] * W
            pts = [(x0, 0), (x1, 0), (x1, H), (x0, H)]
        else:
            xs, ys = to_px(c.vertices)
            pts = list(zip(xs, ys))
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        parts.append(f'<polygon class="cell" points="{coords}" fill="{_fill(c, style, gmax)}" '
                     f'stroke="{style.stroke}" stroke-width="{style.stroke_width}"/>')
    if style.points is not None:
        xs, ys = to_px(np.asarray(style.points, dtype=np.float64).reshape(-1, census.k))
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{style.point_radius}" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)
