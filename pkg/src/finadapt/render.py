"""SVG pictures of the pieces of a solution over a planar uncertainty set."""

from __future__ import annotations

import numpy as np

from .errors import NotTwoDimensional
from .model import Instance, Solution
from .solvers import recover_cover

CANVAS = 600
MARGIN = 0.05
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def clip_polygon(polygon: np.ndarray, normal: np.ndarray, offset: float, tol: float = 1e-12) -> np.ndarray:
    """Intersect a convex polygon (ordered vertices) with ``normal . w <= offset``."""
    out = []
    n = len(polygon)
    for i in range(n):
        p, q = polygon[i], polygon[(i + 1) % n]
        fp, fq = normal @ p - offset, normal @ q - offset
        if fp <= tol:
            out.append(p)
        if (fp < -tol and fq > tol) or (fp > tol and fq < -tol):
            s = fp / (fp - fq)
            out.append(p + s * (q - p))
    return np.array(out).reshape(-1, 2)


def _dedupe(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    kept = []
    for p in points:
        if not kept or np.max(np.abs(p - kept[-1])) > tol:
            kept.append(p)
    if len(kept) > 1 and np.max(np.abs(kept[0] - kept[-1])) <= tol:
        kept.pop()
    return np.array(kept).reshape(-1, 2)


def piece_polygons(inst: Instance, sol: Solution) -> list[np.ndarray]:
    """Vertices (counter-clockwise) of each piece intersected with omega; empty arrays for empty pieces."""
    if inst.dim_omega != 2 or inst.omega.affine_dimension != 2:
        raise NotTwoDimensional("rendering needs a full-dimensional planar uncertainty set")
    V = inst.omega.vertices
    outline = V[inst.omega.polygon_order()]
    polys = []
    for piece in recover_cover(inst, sol):
        poly = outline
        for normal, offset in zip(piece.normals, piece.offsets):
            if not np.any(normal):
                if offset < -1e-9:
                    poly = np.zeros((0, 2))
                continue
            poly = clip_polygon(poly, normal, offset)
            if len(poly) == 0:
                break
        polys.append(_dedupe(poly))
    return polys


def _fmt(v: float) -> str:
    s = f"{v:.10g}"
    return "0" if s == "-0" else s


def _points(poly: np.ndarray) -> str:
    # y is flipped so that the picture has the usual orientation
    return " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in poly)


def render_svg(inst: Instance, sol: Solution) -> str:
    polys = piece_polygons(inst, sol)
    V = inst.omega.vertices
    outline = V[inst.omega.polygon_order()]
    lo, hi = V.min(axis=0), V.max(axis=0)
    span = float(max(hi - lo))
    pad = MARGIN * span / (1 - 2 * MARGIN)
    size = span + 2 * pad
    cx, cy = (lo + hi) / 2
    x0, y0 = cx - size / 2, -cy - size / 2
    stroke = size / 300
    font = size / 30

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(size)} {_fmt(size)}">',
        f'  <rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(size)}" height="{_fmt(size)}" fill="white"/>',
    ]
    for i, poly in enumerate(polys):
        if len(poly) < 3:
            continue
        color = PALETTE[i % len(PALETTE)]
        lines.append(
            f'  <polygon class="piece" data-piece="{i}" points="{_points(poly)}" fill="{color}" '
            f'fill-opacity="0.35" stroke="{color}" stroke-width="{_fmt(stroke)}"/>'
        )
    lines.append(
        f'  <polygon class="omega" points="{_points(outline)}" fill="none" stroke="black" '
        f'stroke-width="{_fmt(2 * stroke)}"/>'
    )
    for i, y in enumerate(sol.ys):
        color = PALETTE[i % len(PALETTE)]
        ty = y0 + (i + 1.2) * font * 1.2
        label = ", ".join(_fmt(float(v)) for v in np.round(y, 6))
        lines.append(
            f'  <text x="{_fmt(x0 + font * 0.5)}" y="{_fmt(ty)}" font-size="{_fmt(font)}" '
            f'font-family="sans-serif" fill="{color}">y{i + 1} = ({label})</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
