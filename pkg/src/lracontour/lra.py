"""Eigenanchor basis: learn it from a contour corpus, project and reconstruct.

A contour p (flattened, 2N values) is encoded as ``c = U_M.T @ p`` and
decoded as ``U_M @ c``, where the columns of ``U_M`` are the leading left
singular vectors of the contour matrix. No mean is subtracted.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import geometry as geo
from .corpus import Corpus, assemble_matrix, prepare
from .errors import ArgumentError, CorpusError, FormatError
from .linalg import svd

BASIS_FORMAT = "lra-basis"
BASIS_VERSION = 1


@dataclass(frozen=True)
class EigenanchorBasis:
    u_m: np.ndarray          # (2N, M), orthonormal columns
    sigma: np.ndarray        # (M,), descending
    n_vertices: int
    origin_policy: str = geo.BBOX_CENTER
    corpus_size: int = 0

    def __post_init__(self):
        if self.u_m.ndim != 2 or self.u_m.shape[0] != 2 * self.n_vertices:
            raise ArgumentError(f"u_m shape {self.u_m.shape} does not match N={self.n_vertices}")
        if len(self.sigma) != self.u_m.shape[1]:
            raise ArgumentError("sigma length must equal basis dim")

    @property
    def dim(self) -> int:
        return self.u_m.shape[1]

    @cached_property
    def basis_id(self) -> str:
        h = hashlib.sha256()
        h.update(f"{BASIS_FORMAT}|{self.n_vertices}|{self.dim}|{self.origin_policy}|{self.corpus_size}".encode())
        h.update(np.ascontiguousarray(self.sigma, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.u_m, dtype="<f8").tobytes())
        return h.hexdigest()

    def truncated(self, m: int) -> "EigenanchorBasis":
        """Leading ``m`` eigenanchors; still the best rank-m basis for the corpus."""
        if not 1 <= m <= self.dim:
            raise ArgumentError(f"cannot truncate a {self.dim}-dim basis to {m}")
        return EigenanchorBasis(self.u_m[:, :m].copy(), self.sigma[:m].copy(),
                                self.n_vertices, self.origin_policy, self.corpus_size)

    def anchor(self, k: int) -> np.ndarray:
        """The k-th eigenanchor (0-based) as an (N, 2) contour."""
        return geo.unflatten(self.u_m[:, k])


@dataclass(frozen=True)
class CoefficientVector:
    c: np.ndarray
    basis_id: str

    def __len__(self) -> int:
        return len(self.c)


def learn_basis(corpus: Corpus | np.ndarray, m: int, origin_policy: str | None = None) -> EigenanchorBasis:
    """Best rank-m eigenanchor basis for a corpus (or an already assembled 2N x L matrix).

    When ``m`` exceeds the rank of the contour matrix the extra anchors are
    orthonormal completions with zero singular value.
    """
    if isinstance(corpus, Corpus):
        a = assemble_matrix(corpus)
        policy = corpus.origin_policy
    else:
        a = np.asarray(corpus, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] % 2:
            raise CorpusError(f"contour matrix must be 2N x L, got {a.shape}")
        policy = geo.BBOX_CENTER
    policy = origin_policy or policy
    n2, n_contours = a.shape
    if not 1 <= m <= n2:
        raise ArgumentError(f"basis dim must be in [1, 2N={n2}], got {m}")
    s = svd(a)
    r = s.rank
    if m <= r:
        u_m, sigma = s.u[:, :m], s.sigma[:m]
    else:
        u_m = np.hstack([s.u, s.complement[:, : m - r]])
        sigma = np.concatenate([s.sigma, np.zeros(m - r)])
    return EigenanchorBasis(u_m.copy(), sigma.copy(), n2 // 2, policy, n_contours)


def _flat(basis: EigenanchorBasis, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 2:
        p = geo.flatten(p)
    if p.shape != (2 * basis.n_vertices,):
        raise ArgumentError(f"contour has {p.size} values, basis expects {2 * basis.n_vertices}")
    return p


def encode(basis: EigenanchorBasis, p) -> CoefficientVector:
    """Project a canonical flat contour (or (N, 2) array) onto the eigenanchors."""
    return CoefficientVector(basis.u_m.T @ _flat(basis, p), basis.basis_id)


def decode(basis: EigenanchorBasis, c) -> np.ndarray:
    """Flat contour ``U_M @ c``. Tagged vectors must come from the same basis."""
    if isinstance(c, CoefficientVector):
        if c.basis_id != basis.basis_id:
            raise ArgumentError("coefficient vector was produced by a different basis")
        c = c.c
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (basis.dim,):
        raise ArgumentError(f"coefficient vector has length {c.size}, basis dim is {basis.dim}")
    return basis.u_m @ c


def encode_many(basis: EigenanchorBasis, flats: np.ndarray) -> np.ndarray:
    """Columns of ``flats`` (2N x L) to coefficient columns (M x L)."""
    flats = np.asarray(flats, dtype=np.float64)
    if flats.shape[0] != 2 * basis.n_vertices:
        raise ArgumentError(f"expected {2 * basis.n_vertices} rows, got {flats.shape[0]}")
    return basis.u_m.T @ flats


def decode_many(basis: EigenanchorBasis, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != basis.dim:
        raise ArgumentError(f"expected {basis.dim} coefficient rows, got {coeffs.shape[0]}")
    return basis.u_m @ coeffs


def reconstruct(basis: EigenanchorBasis, raw) -> np.ndarray:
    """Encode and decode a raw contour; the result is back in the raw frame."""
    p, offset = prepare(raw, basis.n_vertices, basis.origin_policy)
    return geo.unflatten(decode(basis, encode(basis, p))) + offset


def reconstruction_iou(basis: EigenanchorBasis, raw, resolution: int = 512) -> float:
    return geo.polygon_iou(geo.as_contour(raw), reconstruct(basis, raw), resolution)


class LraCodec:
    """Codec wrapper so the basis sits next to the baseline codecs."""

    kind = "lra"

    def __init__(self, basis: EigenanchorBasis):
        self.basis = basis
        self.dim = basis.dim
        self.n_vertices = basis.n_vertices

    def encode(self, canon: np.ndarray) -> np.ndarray:
        p = geo.resample(canon, self.n_vertices)
        return encode(self.basis, p).c

    def decode(self, coeffs) -> np.ndarray:
        return geo.unflatten(decode(self.basis, coeffs))

    def reconstruct(self, raw) -> np.ndarray:
        return reconstruct(self.basis, raw)


# ----------------------------------------------------------------- persistence

def basis_to_dict(basis: EigenanchorBasis) -> dict:
    return {
        "format": BASIS_FORMAT,
        "format_version": BASIS_VERSION,
        "n_vertices": basis.n_vertices,
        "dim": basis.dim,
        "origin_policy": basis.origin_policy,
        "corpus_size": basis.corpus_size,
        "sigma": [float(x) for x in basis.sigma],
        "u_m": [float(x) for x in basis.u_m.ravel()],  # row-major, 2N rows x M cols
        "hash": basis.basis_id,
    }


def basis_from_dict(doc: dict) -> EigenanchorBasis:
    if doc.get("format") != BASIS_FORMAT:
        raise FormatError(f"not a basis file (format={doc.get('format')!r})")
    if doc.get("format_version") != BASIS_VERSION:
        raise FormatError(f"unsupported basis format_version {doc.get('format_version')!r}")
    try:
        n, m = int(doc["n_vertices"]), int(doc["dim"])
        u_m = np.array(doc["u_m"], dtype=np.float64).reshape(2 * n, m)
        basis = EigenanchorBasis(u_m, np.array(doc["sigma"], dtype=np.float64), n,
                                 doc["origin_policy"], int(doc["corpus_size"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"malformed basis file: {exc}") from None
    if doc.get("hash") != basis.basis_id:
        raise FormatError("basis content hash mismatch")
    return basis


def save_basis(path, basis: EigenanchorBasis) -> None:
    Path(path).write_text(json.dumps(basis_to_dict(basis), indent=1) + "\n")


def load_basis(path) -> EigenanchorBasis:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return basis_from_dict(doc)
