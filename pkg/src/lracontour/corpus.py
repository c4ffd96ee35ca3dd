"""Annotation ingestion, synthetic text ribbons, and the contour matrix."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from .errors import ContourError, CorpusError, DataError, FormatError

SIDE_POINTS = 7  # CTW1500 convention: 7 top + 7 bottom vertices
MIN_BEND_RADIUS = 2.0  # in text heights


@dataclass(frozen=True)
class Corpus:
    """Canonicalized contours, all resampled to ``n_vertices``.

    ``raw`` keeps the annotations as read (image coordinates) and ``offsets``
    the translation removed from each one, so reconstructions can be put back
    in place and scored against the original polygons.
    """

    contours: list
    n_vertices: int
    source: str = "file"
    origin_policy: str = geo.BBOX_CENTER
    raw: list = field(default_factory=list)
    offsets: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.contours)


def prepare(raw, n_vertices: int, origin_policy: str = geo.BBOX_CENTER):
    """Canonicalize then resample one contour. Returns ``(contour, offset)``."""
    deduped = geo.drop_repeats(geo.as_contour(raw))
    canon = geo.canonicalize(deduped, origin_policy)
    offset = geo.canonical_offset(deduped, origin_policy)
    return geo.resample(canon, n_vertices), offset


def build_corpus(raws, n_vertices: int, origin_policy: str = geo.BBOX_CENTER,
                 source: str = "file") -> Corpus:
    raws = [geo.as_contour(r) for r in raws]
    if not raws:
        raise CorpusError("corpus is empty")
    contours, offsets = [], []
    for i, r in enumerate(raws):
        try:
            c, off = prepare(r, n_vertices, origin_policy)
        except ContourError as exc:
            raise ContourError(f"contour {i}: {exc}") from None
        contours.append(c)
        offsets.append(off)
    return Corpus(contours, n_vertices, source, origin_policy, raws, np.array(offsets))


def assemble_matrix(corpus: Corpus) -> np.ndarray:
    """The 2N x L contour matrix, one flattened contour per column."""
    if len(corpus) == 0:
        raise CorpusError("corpus is empty")
    n2 = 2 * corpus.n_vertices
    cols = [geo.flatten(c) for c in corpus.contours]
    bad = [i for i, col in enumerate(cols) if len(col) != n2]
    if bad:
        raise CorpusError(f"contours {bad[:5]} do not have {corpus.n_vertices} vertices")
    return np.column_stack(cols)


# ---------------------------------------------------------------- file formats

def parse_polylines(text: str) -> list[np.ndarray]:
    """One contour per non-blank line: ``x1,y1,...,xK,yK``."""
    contours = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise FormatError(f"line {lineno}: unparsable number in {line[:60]!r}") from None
        if len(values) % 2:
            raise FormatError(f"line {lineno}: odd coordinate count {len(values)}")
        pts = np.array(values).reshape(-1, 2)
        if len(pts) < geo.MIN_VERTICES:
            raise ContourError(f"line {lineno}: {len(pts)} vertices, need at least {geo.MIN_VERTICES}")
        if not np.all(np.isfinite(pts)):
            raise FormatError(f"line {lineno}: non-finite coordinate")
        contours.append(pts)
    return contours


def parse_json(text: str) -> list[np.ndarray]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "contours" not in doc:
        raise FormatError('JSON corpus must be an object with a "contours" array')
    contours = []
    for i, item in enumerate(doc["contours"]):
        try:
            pts = np.asarray(item, dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(f"contour {i}: not a list of [x, y] pairs") from None
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise FormatError(f"contour {i}: expected [[x, y], ...], got shape {pts.shape}")
        if len(pts) < geo.MIN_VERTICES:
            raise ContourError(f"contour {i}: {len(pts)} vertices, need at least {geo.MIN_VERTICES}")
        contours.append(pts)
    return contours


CTW_FIELDS = 32  # xmin, ymin, xmax, ymax, then 14 (dx, dy) offsets from (xmin, ymin)


def parse_ctw1500(text: str) -> list[np.ndarray]:
    """Original CTW1500 label lines: a box followed by 14 box-relative points."""
    contours = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values = [float(tok) for tok in line.split(",")[:CTW_FIELDS]]
        except ValueError:
            raise FormatError(f"line {lineno}: unparsable number in {line[:60]!r}") from None
        if len(values) != CTW_FIELDS:
            raise FormatError(f"line {lineno}: expected {CTW_FIELDS} values, got {len(values)}")
        contours.append(np.array(values[4:]).reshape(-1, 2) + values[:2])
    return contours


FORMATS = {"polylines": parse_polylines, "json": parse_json, "ctw1500": parse_ctw1500}


def infer_format(path) -> str:
    return "json" if str(path).lower().endswith(".json") else "polylines"


def read_contours(path, fmt: str | None = None) -> list[np.ndarray]:
    """Read one annotation file, or every ``*.txt`` / ``*.json`` file of a directory in name order."""
    path = Path(path)
    if path.is_dir():
        files = sorted(f for f in path.iterdir() if f.suffix.lower() in (".txt", ".json"))
        contours = [c for f in files for c in read_contours(f, fmt)]
        if not contours:
            raise CorpusError(f"{path}: no contours found")
        return contours
    fmt = fmt or infer_format(path)
    if fmt not in FORMATS:
        raise FormatError(f"unknown annotation format {fmt!r}")
    try:
        contours = FORMATS[fmt](path.read_text())
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from None
    if not contours:
        raise CorpusError(f"{path}: no contours found")
    return contours


def load_annotations(path, fmt: str | None = None, n_vertices: int = 32,
                     origin_policy: str = geo.BBOX_CENTER) -> Corpus:
    return build_corpus(read_contours(path, fmt), n_vertices, origin_policy, source="file")


def format_polylines(contours) -> str:
    # repr() gives the shortest decimal that round-trips exactly
    return "".join(",".join(repr(float(v)) for v in np.ravel(c)) + "\n" for c in contours)


def write_contours(path, contours, fmt: str | None = None) -> None:
    fmt = fmt or infer_format(path)
    if fmt == "polylines":
        Path(path).write_text(format_polylines(contours))
    elif fmt == "json":
        doc = {"contours": [np.asarray(c, dtype=float).tolist() for c in contours]}
        Path(path).write_text(json.dumps(doc))
    else:
        raise FormatError(f"unknown annotation format {fmt!r}")


# ----------------------------------------------------------- synthetic ribbons

@dataclass(frozen=True)
class SynthParams:
    count: int = 2000
    aspect_ratio_range: tuple[float, float] = (1.5, 8.0)
    curvature_range: float = 1.0        # max spine turning, radians
    straight_fraction: float = 0.5      # share of ribbons drawn with no bend at all
    wave_harmonics: int = 1
    rotation_range: tuple[float, float] = (-0.3, 0.3)
    height_range: tuple[float, float] = (16.0, 64.0)
    taper: float = 0.2                  # max relative half-width change end to end
    image_size: float = 1024.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.aspect_ratio_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad aspect_ratio_range {self.aspect_ratio_range}")
        lo, hi = self.rotation_range
        if lo > hi:
            raise ValueError(f"bad rotation_range {self.rotation_range}")
        lo, hi = self.height_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad height_range {self.height_range}")
        if not 0.0 <= self.straight_fraction <= 1.0:
            raise ValueError(f"straight_fraction must be in [0, 1], got {self.straight_fraction}")
        if self.curvature_range < 0 or self.wave_harmonics < 0 or self.count < 0:
            raise ValueError("curvature_range, wave_harmonics and count must be >= 0")


def _ribbon(rng: np.random.Generator, p: SynthParams) -> np.ndarray:
    height = rng.uniform(*p.height_range)
    aspect = np.exp(rng.uniform(*np.log(p.aspect_ratio_range)))
    length = height * aspect

    # spine turning angle: a polynomial bend plus a few sinusoidal wiggles,
    # all scaled so the excursion stays inside curvature_range
    u = np.linspace(0.0, 1.0, 257)
    s = u - 0.5
    bend = rng.uniform(-1.0, 1.0) * s + rng.uniform(-1.0, 1.0) * (4 * s**3)
    wave = np.zeros_like(u)
    for h in range(1, p.wave_harmonics + 1):
        wave += rng.uniform(-1.0, 1.0) / h * np.sin(2 * np.pi * h * u + rng.uniform(0, 2 * np.pi))
    phi = bend + 0.5 * wave
    phi = phi - phi[128]
    peak = np.abs(phi).max()
    if rng.uniform() < p.straight_fraction:
        peak = 0.0
    if peak > 0:
        phi *= p.curvature_range * rng.uniform(0.0, 1.0) / peak
        # text bends gently: keep the spine's radius of curvature above
        # MIN_BEND_RADIUS heights so short words do not fold
        kappa_h = np.abs(np.gradient(phi, u)).max() * height / length
        if kappa_h > 1.0 / MIN_BEND_RADIUS:
            phi /= kappa_h * MIN_BEND_RADIUS
    else:
        phi = np.zeros_like(u)

    # integrate the unit tangent (trapezoid rule) to get the spine
    tangent = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    steps = 0.5 * (tangent[1:] + tangent[:-1]) * (length / (len(u) - 1))
    spine = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])
    normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1)

    idx = np.linspace(0, len(u) - 1, SIDE_POINTS).round().astype(int)
    half = 0.5 * height * (1.0 + p.taper * rng.uniform(-1.0, 1.0) * (u[idx] - 0.5))
    # image y grows downward, so "top" is the -normal side
    top = spine[idx] - half[:, None] * normal[idx]
    bottom = (spine[idx] + half[:, None] * normal[idx])[::-1]
    pts = np.vstack([top, bottom])

    theta = rng.uniform(*p.rotation_range)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    pts = (pts - pts.mean(axis=0)) @ rot.T
    center = rng.uniform(0.25, 0.75, size=2) * p.image_size
    return pts + center


def synthesize_contours(params: SynthParams) -> list[np.ndarray]:
    """Raw 14-vertex ribbons (7 top left-to-right, 7 bottom right-to-left)."""
    rng = np.random.default_rng(params.seed)
    return [_ribbon(rng, params) for _ in range(params.count)]


def generate_synthetic(params: SynthParams, n_vertices: int = 32,
                       origin_policy: str = geo.BBOX_CENTER) -> Corpus:
    return build_corpus(synthesize_contours(params), n_vertices, origin_policy, source="synthetic")
