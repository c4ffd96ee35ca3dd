"""Codec registry and the coefficient container shared by every codec.

Codec specs are short strings: ``lra:14``, ``fourier:5`` (harmonics),
``cheb:44`` (terms) and ``bezier``. A coefficient file stores one record per
contour with the codec's kind tag, so any file can be decoded without
knowing in advance which codec wrote it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry as geo
from .baselines import BezierCodec, ChebFit, ChebyshevCodec, FourierCodec
from .errors import ArgumentError, FormatError
from .lra import EigenanchorBasis, LraCodec

COEFF_FORMAT = "lra-coefficients"
COEFF_VERSION = 1

_ALIASES = {
    "lra": "lra",
    "fourier": "fourier",
    "cheb": "chebyshev",
    "chebyshev": "chebyshev",
    "bezier": "bezier",
}


@dataclass(frozen=True)
class CodecSpec:
    kind: str          # lra | fourier | chebyshev | bezier
    param: int         # basis dim, harmonics, terms; 16 for bezier

    @property
    def dim(self) -> int:
        """Number of reals per encoded contour."""
        return 4 * self.param + 2 if self.kind == "fourier" else self.param

    def __str__(self) -> str:
        return self.kind if self.kind == "bezier" else f"{self.kind}:{self.param}"


def parse_codec_spec(text: str, default_dim: int = 14, default_harmonics: int = 5,
                     default_cheb_terms: int = 44) -> CodecSpec:
    """``kind[:param]``; a bare kind takes the matching default."""
    kind, _, arg = text.strip().lower().partition(":")
    if kind not in _ALIASES:
        raise ArgumentError(f"unknown codec {kind!r}; expected one of lra, fourier, cheb, bezier")
    kind = _ALIASES[kind]
    arg = arg.rstrip("h")  # "fourier:5h" reads as five harmonics
    if kind == "bezier":
        if arg not in ("", "16"):
            raise ArgumentError("bezier codec has a fixed 16 parameters")
        return CodecSpec(kind, 16)
    if not arg:
        param = {"lra": default_dim, "fourier": default_harmonics, "chebyshev": default_cheb_terms}[kind]
    else:
        try:
            param = int(arg)
        except ValueError:
            raise ArgumentError(f"bad codec parameter in {text!r}") from None
    if param < (0 if kind == "fourier" else 1):
        raise ArgumentError(f"codec parameter out of range in {text!r}")
    return CodecSpec(kind, param)


def make_codec(spec: CodecSpec, n_vertices: int = 32, basis: EigenanchorBasis | None = None,
               origin_policy: str = geo.BBOX_CENTER):
    if spec.kind == "lra":
        if basis is None:
            raise ArgumentError("lra codec needs a basis")
        if basis.n_vertices != n_vertices:
            raise ArgumentError(f"basis has N={basis.n_vertices}, requested N={n_vertices}")
        return LraCodec(basis.truncated(spec.param))
    if spec.kind == "fourier":
        return FourierCodec(spec.param, n_vertices, origin_policy=origin_policy)
    if spec.kind == "chebyshev":
        return ChebyshevCodec(spec.param, n_vertices, origin_policy=origin_policy)
    return BezierCodec(n_vertices, origin_policy=origin_policy)


# ------------------------------------------------------------ coefficient files


def encode_record(codec, raw) -> dict:
    """Encode one raw contour; the record keeps the translation removed."""
    policy = codec.basis.origin_policy if isinstance(codec, LraCodec) else codec.origin_policy
    deduped = geo.drop_repeats(geo.as_contour(raw))
    canon = geo.canonicalize(deduped, policy)
    offset = geo.canonical_offset(deduped, policy)
    code = codec.encode(canon)
    rec = {"offset": [float(v) for v in offset]}
    if isinstance(code, ChebFit):
        rec["coeffs"] = [float(v) for v in code.coeffs]
        rec["center"] = [float(v) for v in code.center]
        rec["degenerate"] = bool(code.degenerate)
    else:
        rec["coeffs"] = [float(v) for v in code]
    return rec


def decode_record(codec, rec: dict) -> np.ndarray:
    try:
        coeffs = np.asarray(rec["coeffs"], dtype=np.float64)
        offset = np.asarray(rec["offset"], dtype=np.float64)
        if isinstance(codec, ChebyshevCodec):
            code = ChebFit(coeffs, np.asarray(rec["center"], dtype=np.float64), bool(rec.get("degenerate", False)))
        else:
            code = coeffs
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed coefficient record: {exc}") from None
    if offset.shape != (2,):
        raise FormatError("record offset must be [x, y]")
    return codec.decode(code) + offset


def write_coefficients(path, spec: CodecSpec, n_vertices: int, records: list[dict],
                       basis_hash: str | None = None, origin_policy: str = geo.BBOX_CENTER) -> None:
    doc = {
        "format": COEFF_FORMAT,
        "format_version": COEFF_VERSION,
        "kind": spec.kind,
        "param": spec.param,
        "dim": spec.dim,
        "n_vertices": n_vertices,
        "origin_policy": origin_policy,
        "basis_hash": basis_hash,
        "records": records,
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def read_coefficients(path) -> tuple[CodecSpec, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != COEFF_FORMAT:
        raise FormatError(f"{path}: not a coefficient file")
    if doc.get("format_version") != COEFF_VERSION:
        raise FormatError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    try:
        spec = CodecSpec(_ALIASES[doc["kind"]], int(doc["param"]))
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{path}: missing or unknown codec kind") from None
    if not isinstance(doc.get("records"), list):
        raise FormatError(f"{path}: records must be a list")
    return spec, doc
