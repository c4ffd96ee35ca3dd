"""Competing text-shape codecs: polar Chebyshev, Fourier contour, Bezier sides.

Every codec works on canonicalized contours and exposes ``encode``,
``decode`` and ``reconstruct`` the same way ``lra.LraCodec`` does, so the
evaluation harness can treat them interchangeably. Parameter counts exclude
the canonical translation, as for the LRA codec.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as cheb

from . import geometry as geo
from .errors import ArgumentError

# ------------------------------------------------------------------ Chebyshev


class ChebFit(NamedTuple):
    coeffs: np.ndarray      # k Chebyshev coefficients of radius(angle)
    center: np.ndarray      # polar origin (area centroid)
    degenerate: bool        # centroid outside the polygon


def polygon_centroid(c: np.ndarray) -> np.ndarray:
    x, y = c[:, 0], c[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) < 1e-12 * max(np.ptp(x) * np.ptp(y), 1e-300):
        return c.mean(axis=0)
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * area)


def point_in_polygon(pt, c: np.ndarray) -> bool:
    """Even-odd rule, same convention as the rasterizer."""
    x, y = pt
    p, q = c, np.roll(c, -1, axis=0)
    hit = ((p[:, 1] <= y) & (q[:, 1] > y)) | ((q[:, 1] <= y) & (p[:, 1] > y))
    if not hit.any():
        return False
    p, q = p[hit], q[hit]
    xc = p[:, 0] + (y - p[:, 1]) * (q[:, 0] - p[:, 0]) / (q[:, 1] - p[:, 1])
    return bool(np.count_nonzero(xc > x) % 2)


def ray_radii(c: np.ndarray, center: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Distance from ``center`` to the farthest boundary crossing along each ray."""
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)[:, None, :]   # (R, 1, 2)
    p = c[None, :, :]
    e = (np.roll(c, -1, axis=0) - c)[None, :, :]                          # (1, E, 2)
    w = p - center
    denom = d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[..., 0] * e[..., 1] - w[..., 1] * e[..., 0]) / denom
        s = (w[..., 0] * d[..., 1] - w[..., 1] * d[..., 0]) / denom
    valid = (denom != 0) & (t >= 0) & (s >= 0) & (s <= 1)
    return np.where(valid, t, 0.0).max(axis=1)


def cheb_encode(p, k: int, n_rays: int = 360) -> ChebFit:
    """Least-squares Chebyshev fit (degree k-1) of boundary radius vs. polar angle."""
    if k < 1:
        raise ArgumentError(f"need at least one Chebyshev term, got {k}")
    c = geo.as_contour(p, 3)
    center = polygon_centroid(c)
    angles = 2 * np.pi * np.arange(n_rays) / n_rays
    radii = ray_radii(c, center, angles)
    coeffs = cheb.chebfit(angles / np.pi - 1.0, radii, k - 1)
    return ChebFit(coeffs, center, not point_in_polygon(center, c))


def cheb_decode(fit: ChebFit, n: int) -> np.ndarray:
    angles = 2 * np.pi * np.arange(n) / n
    r = cheb.chebval(angles / np.pi - 1.0, fit.coeffs)
    return fit.center + r[:, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)


# -------------------------------------------------------------------- Fourier


def fourier_encode(p, k: int) -> np.ndarray:
    """DC plus harmonics +-1..+-k of the complex vertex sequence, as 4k+2 reals.

    Layout: ``[re c0, im c0, re c1, im c1, re c-1, im c-1, ..., re c-k, im c-k]``.
    The vertices are used as given, so resample first for arc-length spacing.
    """
    c = geo.as_contour(p, 1)
    n = len(c)
    if k < 0 or n < 2 * k + 1:
        raise ArgumentError(f"{k} harmonics need at least {2 * k + 1} vertices, got {n}")
    spectrum = np.fft.fft(c[:, 0] + 1j * c[:, 1]) / n
    freqs = [0] + [f for h in range(1, k + 1) for f in (h, -h)]
    kept = spectrum[freqs]
    return np.column_stack([kept.real, kept.imag]).ravel()


def fourier_decode(coeffs, n: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if len(coeffs) % 4 != 2:
        raise ArgumentError(f"Fourier code length must be 4k+2, got {len(coeffs)}")
    k = (len(coeffs) - 2) // 4
    z = coeffs[0::2] + 1j * coeffs[1::2]
    freqs = np.array([0] + [f for h in range(1, k + 1) for f in (h, -h)])
    t = np.arange(n) / n
    pts = np.exp(2j * np.pi * np.outer(t, freqs)) @ z
    return np.column_stack([pts.real, pts.imag])


# --------------------------------------------------------------------- Bezier


def _bernstein(t: np.ndarray) -> np.ndarray:
    mt = 1.0 - t
    return np.column_stack([mt**3, 3 * t * mt**2, 3 * t**2 * mt, t**3])


def _chord_params(pts: np.ndarray) -> np.ndarray:
    d = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(d)])
    return cum / cum[-1] if cum[-1] > 0 else np.linspace(0.0, 1.0, len(pts))


def fit_cubic_bezier(pts: np.ndarray) -> np.ndarray:
    """Control points (4, 2) of a cubic through both end points, least squares inside."""
    pts = np.asarray(pts, dtype=np.float64)
    p0, p3 = pts[0], pts[-1]
    if len(pts) <= 2:
        return np.array([p0, (2 * p0 + p3) / 3, (p0 + 2 * p3) / 3, p3])
    t = _chord_params(pts)
    if len(pts) == 3:
        # quadratic through the middle point, degree-elevated to cubic
        tm = t[1]
        q1 = (pts[1] - (1 - tm) ** 2 * p0 - tm**2 * p3) / (2 * tm * (1 - tm))
        return np.array([p0, (p0 + 2 * q1) / 3, (2 * q1 + p3) / 3, p3])
    basis = _bernstein(t)
    rhs = pts - np.outer(basis[:, 0], p0) - np.outer(basis[:, 3], p3)
    inner, *_ = np.linalg.lstsq(basis[:, 1:3], rhs, rcond=None)
    return np.array([p0, inner[0], inner[1], p3])


def split_sides(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Top side is the first half of the vertices, bottom side the rest."""
    half = len(p) // 2
    return p[:half], p[half:]


def bezier_encode(p) -> np.ndarray:
    """Two cubic Beziers (top, bottom) as 16 reals: 4 control points per side."""
    c = geo.as_contour(p, 4)
    top, bottom = split_sides(c)
    return np.concatenate([fit_cubic_bezier(top).ravel(), fit_cubic_bezier(bottom).ravel()])


def bezier_decode(coeffs, n: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (16,):
        raise ArgumentError(f"Bezier code must have 16 values, got {coeffs.size}")
    ctrl = coeffs.reshape(2, 4, 2)
    n_top = n // 2
    top = _bernstein(np.linspace(0.0, 1.0, n_top)) @ ctrl[0]
    bottom = _bernstein(np.linspace(0.0, 1.0, n - n_top)) @ ctrl[1]
    return np.vstack([top, bottom])


# ------------------------------------------------------------- codec objects


class _Codec:
    kind = ""
    dim = 0

    def __init__(self, n_vertices: int = 32, origin_policy: str = geo.BBOX_CENTER):
        self.n_vertices = n_vertices
        self.origin_policy = origin_policy

    def reconstruct(self, raw) -> np.ndarray:
        deduped = geo.drop_repeats(geo.as_contour(raw))
        canon = geo.canonicalize(deduped, self.origin_policy)
        offset = geo.canonical_offset(deduped, self.origin_policy)
        return self.decode(self.encode(canon)) + offset


class ChebyshevCodec(_Codec):
    kind = "chebyshev"

    def __init__(self, k: int = 44, n_vertices: int = 32, n_rays: int = 360, **kw):
        super().__init__(n_vertices, **kw)
        self.dim = k
        self.n_rays = n_rays

    def encode(self, canon):
        return cheb_encode(canon, self.dim, self.n_rays)

    def decode(self, fit):
        return cheb_decode(fit, self.n_vertices)


class FourierCodec(_Codec):
    kind = "fourier"

    def __init__(self, harmonics: int = 5, n_vertices: int = 32, **kw):
        super().__init__(n_vertices, **kw)
        if n_vertices < 2 * harmonics + 1:
            raise ArgumentError(f"{harmonics} harmonics need N >= {2 * harmonics + 1}")
        self.harmonics = harmonics
        self.dim = 4 * harmonics + 2

    def encode(self, canon):
        return fourier_encode(geo.resample(canon, self.n_vertices), self.harmonics)

    def decode(self, coeffs):
        return fourier_decode(coeffs, self.n_vertices)


class BezierCodec(_Codec):
    kind = "bezier"
    dim = 16

    def encode(self, canon):
        return bezier_encode(canon)

    def decode(self, coeffs):
        return bezier_decode(coeffs, self.n_vertices)
