"""Closed-contour primitives.

A contour is a float64 array of shape ``(n, 2)``; the closing edge from the
last vertex back to the first is implicit. Flat contours are the interleaved
``[x1, y1, ..., xn, yn]`` vectors that become columns of the contour matrix.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ArgumentError, ContourError, FormatError

BBOX_CENTER = "bbox_center"
NO_ORIGIN = "none"
ORIGIN_POLICIES = (BBOX_CENTER, NO_ORIGIN)

MIN_VERTICES = 4

# 8-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_ARC_SUBDIV = 8
DENSITY = 8  # spline knots per output vertex, see resample()


def as_contour(vertices, min_vertices: int = 1) -> np.ndarray:
    """Coerce ``vertices`` to an ``(n, 2)`` float64 array and check it."""
    arr = np.asarray(vertices, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ContourError(f"contour must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContourError("contour has non-finite coordinates")
    if len(arr) < min_vertices:
        raise ContourError(f"contour needs at least {min_vertices} vertices, got {len(arr)}")
    return arr


def drop_repeats(c: np.ndarray) -> np.ndarray:
    """Remove consecutive duplicate vertices, including a repeated closing vertex."""
    c = as_contour(c)
    if len(c) == 0:
        return c
    keep = np.any(c != np.roll(c, 1, axis=0), axis=1)
    if not keep.any():
        # every vertex identical
        return c[:1]
    # the first vertex always survives so the phase anchor is kept
    keep[0] = True
    out = c[keep]
    if len(out) > 1 and np.array_equal(out[-1], out[0]):
        out = out[:-1]
    return out


def bbox(c: np.ndarray) -> tuple[float, float, float, float]:
    return float(c[:, 0].min()), float(c[:, 1].min()), float(c[:, 0].max()), float(c[:, 1].max())


def bbox_center(c: np.ndarray) -> np.ndarray:
    x0, y0, x1, y1 = bbox(c)
    return np.array([0.5 * (x0 + x1), 0.5 * (y0 + y1)])


def canonical_offset(c: np.ndarray, origin_policy: str = BBOX_CENTER) -> np.ndarray:
    """Translation that ``canonicalize`` subtracts under ``origin_policy``."""
    if origin_policy == BBOX_CENTER:
        return bbox_center(c)
    if origin_policy == NO_ORIGIN:
        return np.zeros(2)
    raise ArgumentError(f"unknown origin policy {origin_policy!r}; expected one of {ORIGIN_POLICIES}")


def canonicalize(raw, origin_policy: str = BBOX_CENTER) -> np.ndarray:
    """Drop repeated vertices and move the contour into the canonical frame.

    With ``bbox_center`` the axis-aligned bounding box is centered on the
    origin; with ``none`` the coordinates are left alone. Vertex order is
    preserved. Raises ContourError if fewer than 4 distinct vertices remain.
    """
    c = drop_repeats(as_contour(raw))
    if len(c) < MIN_VERTICES:
        raise ContourError(f"contour has {len(c)} distinct vertices, need at least {MIN_VERTICES}")
    return c - canonical_offset(c, origin_policy)


def densify(c: np.ndarray, pieces: int) -> np.ndarray:
    """Split every edge evenly so no piece is longer than perimeter / ``pieces``.

    Original vertices are kept (and stay first in their edge), so a spline
    through the result still interpolates them.
    """
    closed = np.vstack([c, c[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    total = seg.sum()
    if total <= 0.0 or pieces <= 0:
        return c
    counts = np.maximum(1, np.ceil(seg / (total / pieces) - 1e-9).astype(int))
    out = [closed[i] + (np.arange(k) / k)[:, None] * (closed[i + 1] - closed[i])
           for i, k in enumerate(counts)]
    return np.vstack(out)


def periodic_spline(c: np.ndarray, pieces: int = 0) -> CubicSpline:
    """Closed cubic spline through the vertices, chord-length knots starting at 0.

    With ``pieces > 0`` the polygon is densified first (see ``densify``).
    """
    c = drop_repeats(c)
    if len(c) < 3:
        raise ContourError("need at least 3 distinct vertices to fit a closed spline")
    c = densify(c, pieces)
    closed = np.vstack([c, c[:1]])
    chords = np.hypot(*np.diff(closed, axis=0).T)
    if chords.sum() <= 0.0:
        raise ContourError("contour has zero arc length")
    knots = np.concatenate([[0.0], np.cumsum(chords)])
    return CubicSpline(knots, closed, bc_type="periodic")


def _speed(deriv, t):
    d = deriv(t)
    return np.hypot(d[..., 0], d[..., 1])


def _arc_length_table(spline: CubicSpline):
    knots = spline.x
    # subdivide each knot interval; the spline is a single cubic on each piece
    frac = np.linspace(0.0, 1.0, _ARC_SUBDIV + 1)[:-1]
    starts = (knots[:-1, None] + np.diff(knots)[:, None] * frac).ravel()
    breaks = np.append(starts, knots[-1])
    widths = np.diff(breaks)
    nodes = breaks[:-1, None] + widths[:, None] * _GL_X
    lengths = (_speed(spline.derivative(), nodes) * _GL_W).sum(axis=1) * widths
    return breaks, np.concatenate([[0.0], np.cumsum(lengths)])


def _arc_from(deriv, a: np.ndarray, t: np.ndarray) -> np.ndarray:
    nodes = a[:, None] + (t - a)[:, None] * _GL_X
    return (_speed(deriv, nodes) * _GL_W).sum(axis=1) * (t - a)


def resample(c, n: int, density: int = DENSITY) -> np.ndarray:
    """Place ``n`` vertices at uniform arc length along the closed spline of ``c``.

    The first output vertex is the first input vertex and traversal direction
    is preserved. Edges are densified to ``density * n`` pieces before the
    spline is fitted; a spline through only the annotated corners of a text
    box overshoots by up to a fifth of the box height. ``density=0`` fits the
    bare vertices.
    """
    if n < MIN_VERTICES:
        raise ArgumentError(f"resample count must be >= {MIN_VERTICES}, got {n}")
    spline = periodic_spline(as_contour(c), density * n)
    deriv = spline.derivative()
    breaks, cum = _arc_length_table(spline)
    total = cum[-1]
    if not total > 0.0:
        raise ContourError("contour has zero arc length")

    stations = total * np.arange(n) / n
    j = np.clip(np.searchsorted(cum, stations, side="right") - 1, 0, len(breaks) - 2)
    lo, hi = breaks[j].copy(), breaks[j + 1].copy()
    target = stations - cum[j]
    seg = cum[j + 1] - cum[j]
    t = lo + (hi - lo) * np.divide(target, seg, out=np.zeros_like(target), where=seg > 0)
    a = breaks[j]
    tol = 1e-14 * max(total, 1.0)
    for _ in range(50):
        f = _arc_from(deriv, a, t) - target
        done = np.abs(f) <= tol
        if done.all():
            break
        # keep a bracket so Newton cannot wander off the sub-interval
        lo = np.where(f < 0, t, lo)
        hi = np.where(f > 0, t, hi)
        sp = _speed(deriv, t)
        step = np.divide(f, sp, out=np.zeros_like(f), where=sp > 0)
        t_new = t - step
        bad = (t_new <= lo) | (t_new >= hi) | (sp <= 0)
        t = np.where(done, t, np.where(bad, 0.5 * (lo + hi), t_new))
    out = spline(t)
    out[0] = spline(0.0)
    return out


def flatten(c) -> np.ndarray:
    """Interleave vertices into ``[x1, y1, ..., xn, yn]``."""
    return as_contour(c).reshape(-1).copy()


def unflatten(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1:
        raise FormatError(f"flat contour must be 1-D, got shape {f.shape}")
    if len(f) % 2:
        raise FormatError(f"flat contour has odd length {len(f)}")
    return f.reshape(-1, 2).copy()


def shoelace_area(c: np.ndarray) -> float:
    """Signed area; positive for counter-clockwise order in a y-up frame."""
    x, y = c[:, 0], c[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


class Grid(NamedTuple):
    x0: float
    y0: float
    cell: float
    nx: int
    ny: int


def joint_grid(polys, resolution: int) -> Grid | None:
    """Grid with ``resolution`` cells along the longer side of the joint bbox."""
    pts = np.vstack(polys)
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    longest = max(x1 - x0, y1 - y0)
    if not longest > 0.0:
        return None
    cell = longest / resolution
    nx = max(1, int(np.ceil((x1 - x0) / cell - 1e-9)))
    ny = max(1, int(np.ceil((y1 - y0) / cell - 1e-9)))
    return Grid(float(x0), float(y0), float(cell), nx, ny)


def rasterize(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Even-odd fill of ``c`` sampled at cell centers; returns a (ny, nx) bool mask."""
    p = c
    q = np.roll(c, -1, axis=0)
    ys = grid.y0 + (np.arange(grid.ny) + 0.5) * grid.cell
    py, qy = p[:, 1], q[:, 1]
    yy = ys[:, None]
    # half-open rule: each edge counts for rows in [min_y, max_y)
    hit = ((py <= yy) & (qy > yy)) | ((qy <= yy) & (py > yy))
    rows, edges = np.nonzero(hit)
    if len(rows) == 0:
        return np.zeros((grid.ny, grid.nx), dtype=bool)
    pe, qe = p[edges], q[edges]
    y = ys[rows]
    x = pe[:, 0] + (y - pe[:, 1]) * (qe[:, 0] - pe[:, 0]) / (qe[:, 1] - pe[:, 1])
    # first cell whose center lies strictly right of the crossing
    col = np.floor((x - grid.x0) / grid.cell - 0.5).astype(np.int64) + 1
    col = np.clip(col, 0, grid.nx)
    width = grid.nx + 1
    toggles = np.bincount(rows * width + col, minlength=grid.ny * width).reshape(grid.ny, width)
    return (np.cumsum(toggles[:, :-1], axis=1) & 1).astype(bool)


def _bbox_disjoint(a: np.ndarray, b: np.ndarray) -> bool:
    amin, amax = a.min(axis=0), a.max(axis=0)
    bmin, bmax = b.min(axis=0), b.max(axis=0)
    return bool(np.any(amax < bmin) or np.any(bmax < amin))


class IoU(NamedTuple):
    value: float
    degenerate: bool


def polygon_iou_ex(a, b, resolution: int = 512) -> IoU:
    """Raster IoU plus a flag that is set when either polygon covers no cells."""
    if resolution < 64:
        raise ArgumentError(f"resolution must be >= 64, got {resolution}")
    a = as_contour(a, 3)
    b = as_contour(b, 3)
    if _bbox_disjoint(a, b):
        return IoU(0.0, shoelace_area(a) == 0.0 or shoelace_area(b) == 0.0)
    grid = joint_grid([a, b], resolution)
    if grid is None:
        return IoU(0.0, True)
    ma = rasterize(a, grid)
    mb = rasterize(b, grid)
    na, nb = int(ma.sum()), int(mb.sum())
    if na == 0 or nb == 0:
        return IoU(0.0, True)
    inter = int(np.count_nonzero(ma & mb))
    union = na + nb - inter
    return IoU(inter / union, False)


def polygon_iou(a, b, resolution: int = 512) -> float:
    """Intersection over union of two polygons rasterized on a shared grid."""
    return polygon_iou_ex(a, b, resolution).value
