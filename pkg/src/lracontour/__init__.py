"""Low-rank contour codec for scene-text shapes, with baselines and assignment tools."""
from .config import Config, load_config
from .corpus import Corpus, SynthParams, build_corpus, generate_synthetic, load_annotations
from .errors import ArgumentError, ContourError, CorpusError, DataError, FormatError, LraError, NumericError
from .geometry import canonicalize, polygon_iou, resample
from .linalg import svd, truncate
from .lra import EigenanchorBasis, decode, encode, learn_basis, load_basis, reconstruct, save_basis

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "Config", "ContourError", "Corpus", "CorpusError", "DataError",
    "EigenanchorBasis", "FormatError", "LraError", "NumericError", "SynthParams",
    "build_corpus", "canonicalize", "decode", "encode", "generate_synthetic", "learn_basis",
    "load_annotations", "load_basis", "load_config", "polygon_iou", "reconstruct", "resample", "save_basis",
    "svd", "truncate",
]
