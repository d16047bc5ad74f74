"""Phase-portrait SVG: level loops, trajectories and the origin."""
from __future__ import annotations

import numpy as np

from ..errors import Unsupported

WIDTH = 600
MAX_POINTS = 2000
TRAJECTORY_COLOR = "#222222"


def _ramp(t: float) -> str:
    # blue (outermost) to red (innermost)
    r, g, b = (int(round(c)) for c in (40 + 200 * t, 90, 220 - 180 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(v: float) -> str:
    return format(float(v), ".2f")


def _path_data(points, to_px, closed=False):
    px = to_px(points)
    head = f"M{_fmt(px[0, 0])},{_fmt(px[0, 1])}"
    tail = "".join(f" L{_fmt(x)},{_fmt(y)}" for x, y in px[1:])
    return head + tail + (" Z" if closed else "")


def emit_plot(seq, trajectories, path, box=None) -> None:
    """Write an SVG with one closed path per level and one polyline per trajectory.

    ``box`` is ``(lower, upper)`` for the viewport; by default the bounding
    box of everything drawn, padded by 5 %.  Raises :class:`Unsupported` for
    3-D data (use the mesh export instead).
    """
    surfaces = list(seq) if seq is not None else []
    dims = {H.n for H in surfaces} | {t.states.shape[1] for t in trajectories}
    if dims - {2}:
        raise Unsupported("plots are 2-D only; export 3-D meshes with write_obj")
    if box is None:
        pts = [H.vertices for H in surfaces] + [t.states for t in trajectories]
        pts = np.concatenate(pts) if pts else np.zeros((1, 2))
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        lo, hi = np.minimum(pts.min(axis=0), 0), np.maximum(pts.max(axis=0), 0)
        pad = 0.05 * max(float((hi - lo).max()), 1e-9)
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)
    span = hi - lo
    height = int(round(WIDTH * span[1] / span[0]))
    scale = np.array([WIDTH / span[0], -height / span[1]])
    offset = np.array([-lo[0] * scale[0], height - lo[1] * scale[1]])

    def to_px(p):
        return np.asarray(p) * scale + offset

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}">',
           f'<rect width="{WIDTH}" height="{height}" fill="white"/>']
    m = len(surfaces)
    for i, H in enumerate(surfaces):
        color = _ramp(i / max(m - 1, 1))
        out.append(f'<path d="{_path_data(H.vertices, to_px, closed=True)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.2"><title>a={H.level:.6g}</title></path>')
    for t in trajectories:
        pts = t.states[np.all(np.isfinite(t.states), axis=1)]
        if len(pts) == 0:
            continue
        if len(pts) > MAX_POINTS:
            pts = pts[np.linspace(0, len(pts) - 1, MAX_POINTS).astype(int)]
        out.append(f'<path d="{_path_data(pts, to_px)}" fill="none" '
                   f'stroke="{TRAJECTORY_COLOR}" stroke-width="0.8"/>')
    ox, oy = to_px(np.zeros(2))
    out.append(f'<circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="3" fill="black"/>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
