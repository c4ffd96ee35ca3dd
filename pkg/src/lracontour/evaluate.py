"""Representation-quality evaluation: reconstruction IoU per codec, CSV and SVG output."""
from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from . import geometry as geo
from .codecs import CodecSpec, make_codec
from .errors import FormatError
from .lra import EigenanchorBasis


@dataclass(frozen=True)
class EvalRow:
    codec: str
    dim: int
    mean_iou: float
    median_iou: float
    p5_iou: float
    corpus_size: int
    n_vertices: int
    resolution: int


CSV_HEADER = [f.name for f in fields(EvalRow)]
_CASTS = [str, int, float, float, float, int, int, int]


@dataclass
class EvalReport:
    rows: list[EvalRow]

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.codec, r.dim))

    def row(self, codec: str, dim: int) -> EvalRow:
        for r in self.rows:
            if r.codec == codec and r.dim == dim:
                return r
        raise KeyError((codec, dim))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            # repr keeps every float bit-exact through a text round trip
            w.writerow([repr(v) if isinstance(v, float) else v for v in astuple(r)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EvalReport":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != CSV_HEADER:
            raise FormatError(f"unexpected CSV header {header}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_HEADER):
                raise FormatError(f"CSV line {lineno}: expected {len(CSV_HEADER)} fields")
            try:
                rows.append(EvalRow(*(cast(v) for cast, v in zip(_CASTS, rec))))
            except ValueError as exc:
                raise FormatError(f"CSV line {lineno}: {exc}") from None
        return cls(rows)

    def format_table(self) -> str:
        lines = [f"{'codec':<10} {'dim':>4} {'mean':>8} {'median':>8} {'p5':>8}"]
        for r in self.rows:
            lines.append(f"{r.codec:<10} {r.dim:>4} {r.mean_iou:8.4f} {r.median_iou:8.4f} {r.p5_iou:8.4f}")
        return "\n".join(lines)


def codec_ious(codec, raws, resolution: int = 512) -> np.ndarray:
    """IoU between every raw contour and its reconstruction, in the raw frame."""
    return np.array([geo.polygon_iou(geo.as_contour(r), codec.reconstruct(r), resolution) for r in raws])


def summarize(spec: CodecSpec, ious: np.ndarray, n_vertices: int, resolution: int) -> EvalRow:
    return EvalRow(spec.kind, spec.dim, float(np.mean(ious)), float(np.median(ious)),
                   float(np.percentile(ious, 5)), len(ious), n_vertices, resolution)


def evaluate(specs: list[CodecSpec], raws, *, n_vertices: int = 32, resolution: int = 512,
             basis: EigenanchorBasis | None = None, origin_policy: str = geo.BBOX_CENTER,
             keep_reconstructions: bool = False):
    """Score every codec on ``raws``.

    Returns the report, plus ``{str(spec): [reconstruction, ...]}`` when
    ``keep_reconstructions`` is set.
    """
    rows, recons = [], {}
    for spec in specs:
        codec = make_codec(spec, n_vertices, basis, origin_policy)
        outs = [codec.reconstruct(r) for r in raws]
        ious = np.array([geo.polygon_iou(geo.as_contour(r), o, resolution) for r, o in zip(raws, outs)])
        rows.append(summarize(spec, ious, n_vertices, resolution))
        if keep_reconstructions:
            recons[str(spec)] = outs
    report = EvalReport(rows)
    return (report, recons) if keep_reconstructions else report


# ------------------------------------------------------------------------ SVG

GT_STROKE = "#00a000"
RECON_STROKE = "#d00000"


def _points(c: np.ndarray) -> str:
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in c)


def overlay_svg(gt, recon, margin: float = 4.0) -> str:
    """SVG 1.1 document: ground truth in green, reconstruction in red."""
    gt, recon = geo.as_contour(gt), geo.as_contour(recon)
    both = np.vstack([gt, recon])
    x0, y0 = both.min(axis=0) - margin
    w, h = np.ptp(both, axis=0) + 2 * margin
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w:.3f}" height="{h:.3f}" viewBox="{x0:.3f} {y0:.3f} {w:.3f} {h:.3f}">\n'
        f'  <polygon points="{_points(gt)}" fill="none" stroke="{GT_STROKE}" stroke-width="1"/>\n'
        f'  <polygon points="{_points(recon)}" fill="none" stroke="{RECON_STROKE}" stroke-width="1"/>\n'
        "</svg>\n"
    )


def write_overlays(directory, raws, recons: dict[str, list], limit: int | None = None) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, items in recons.items():
        tag = name.replace(":", "")
        for i, (gt, rc) in enumerate(zip(raws, items)):
            if limit is not None and i >= limit:
                break
            path = out / f"{tag}_{i:05d}.svg"
            path.write_text(overlay_svg(gt, rc))
            written.append(path)
    return written
