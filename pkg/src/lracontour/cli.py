"""``lracontour`` command line: synth, learn, encode, decode, eval, match, nms.

Exit codes: 0 success, 2 bad arguments, 3 bad input data, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import assignment as asg
from . import codecs as cdx
from . import corpus as cp
from . import geometry as geo
from . import lra
from .config import Config, load_config
from .errors import ArgumentError, DataError, FormatError, LraError
from .evaluate import evaluate, write_overlays


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return lo, hi


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    d = cp.SynthParams()
    g = p.add_argument_group("synthetic corpus")
    g.add_argument("--count", type=int, default=d.count)
    g.add_argument("--aspect-range", type=_range, default=d.aspect_ratio_range, metavar="LO,HI")
    g.add_argument("--curvature", type=float, default=d.curvature_range, help="max spine turning (radians)")
    g.add_argument("--straight-fraction", type=float, default=d.straight_fraction)
    g.add_argument("--wave-harmonics", type=int, default=d.wave_harmonics)
    g.add_argument("--rotation-range", type=_range, default=d.rotation_range, metavar="LO,HI")
    g.add_argument("--height-range", type=_range, default=d.height_range, metavar="LO,HI")
    g.add_argument("--taper", type=float, default=d.taper)


def _synth_params(args, cfg: Config) -> cp.SynthParams:
    try:
        return cp.SynthParams(
            count=args.count, aspect_ratio_range=tuple(args.aspect_range),
            curvature_range=args.curvature, straight_fraction=args.straight_fraction,
            wave_harmonics=args.wave_harmonics, rotation_range=tuple(args.rotation_range),
            height_range=tuple(args.height_range), taper=args.taper, seed=cfg.seed,
        )
    except ValueError as exc:
        raise ArgumentError(str(exc)) from None


def _raw_contours(args, cfg: Config) -> list[np.ndarray]:
    if getattr(args, "synthetic", False):
        return cp.synthesize_contours(_synth_params(args, cfg))
    if not args.corpus:
        raise ArgumentError("give a corpus file or --synthetic")
    return cp.read_contours(args.corpus, args.format)


def _add_corpus_input(p: argparse.ArgumentParser, synthetic: bool = True) -> None:
    p.add_argument("corpus", nargs="?", help="PolyLines (.txt) or JSON (.json) annotation file")
    p.add_argument("--format", choices=sorted(cp.FORMATS), help="override format detection")
    if synthetic:
        p.add_argument("--synthetic", action="store_true", help="use the seeded synthetic corpus")
        _add_synth_flags(p)


# ------------------------------------------------------------------- commands


def cmd_synth(args, cfg: Config) -> int:
    raws = cp.synthesize_contours(_synth_params(args, cfg))
    if args.out:
        cp.write_contours(args.out, raws, args.format)
    else:
        sys.stdout.write(cp.format_polylines(raws))
    return 0


def cmd_learn(args, cfg: Config) -> int:
    raws = _raw_contours(args, cfg)
    corpus = cp.build_corpus(raws, cfg.n_vertices, cfg.origin_policy,
                             source="synthetic" if args.synthetic else "file")
    basis = lra.learn_basis(corpus, cfg.dim)
    lra.save_basis(args.out, basis)
    print(f"learned {basis.dim}-dim basis from {len(corpus)} contours (N={basis.n_vertices}) -> {args.out}",
          file=sys.stderr)
    return 0


def _codec_for(args, cfg: Config):
    basis = lra.load_basis(args.basis) if args.basis else None
    if args.codec:
        spec = _codec_spec(args.codec, cfg)
    elif basis is not None:
        spec = cdx.CodecSpec("lra", basis.dim)
    else:
        raise ArgumentError("give --basis or --codec")
    n = basis.n_vertices if basis is not None and spec.kind == "lra" else cfg.n_vertices
    return spec, basis, cdx.make_codec(spec, n, basis, cfg.origin_policy), n


def cmd_encode(args, cfg: Config) -> int:
    spec, basis, codec, n = _codec_for(args, cfg)
    raws = cp.read_contours(args.corpus, args.format)
    records = [cdx.encode_record(codec, r) for r in raws]
    basis_hash = codec.basis.basis_id if spec.kind == "lra" else None
    policy = basis.origin_policy if spec.kind == "lra" else cfg.origin_policy
    cdx.write_coefficients(args.out, spec, n, records, basis_hash, policy)
    return 0


def cmd_decode(args, cfg: Config) -> int:
    spec, doc = cdx.read_coefficients(args.coefficients)
    basis = None
    if spec.kind == "lra":
        if not args.basis:
            raise ArgumentError("decoding lra coefficients needs --basis")
        basis = lra.load_basis(args.basis)
        if doc.get("basis_hash") != basis.truncated(spec.param).basis_id:
            raise DataError("coefficient file was written with a different basis")
    n = int(doc["n_vertices"])
    codec = cdx.make_codec(spec, n, basis, doc.get("origin_policy", cfg.origin_policy))
    contours = [cdx.decode_record(codec, rec) for rec in doc["records"]]
    if args.out:
        cp.write_contours(args.out, contours, args.format)
    else:
        sys.stdout.write(cp.format_polylines(contours))
    return 0


def _codec_spec(text: str, cfg: Config) -> cdx.CodecSpec:
    return cdx.parse_codec_spec(text, cfg.dim, cfg.fourier_harmonics, cfg.cheb_terms)


def cmd_eval(args, cfg: Config) -> int:
    raws = _raw_contours(args, cfg)
    specs = [_codec_spec(s, cfg) for s in args.codecs.split(",") if s.strip()] if args.codecs else []
    specs += [cdx.CodecSpec("lra", m) for m in (args.dims or [])]
    if not specs:
        specs = [cdx.CodecSpec("lra", cfg.dim)]
    specs = list(dict.fromkeys(specs))
    basis = None
    lra_dims = [s.param for s in specs if s.kind == "lra"]
    if lra_dims:
        if args.basis:
            basis = lra.load_basis(args.basis)
        else:
            # no basis given: learn one from the evaluation corpus itself
            corpus = cp.build_corpus(raws, cfg.n_vertices, cfg.origin_policy)
            basis = lra.learn_basis(corpus, max(lra_dims))
        if max(lra_dims) > basis.dim:
            raise ArgumentError(f"basis has {basis.dim} anchors, eval asked for {max(lra_dims)}")
    n = basis.n_vertices if basis is not None else cfg.n_vertices
    want_svg = bool(args.svg_dir)
    result = evaluate(specs, raws, n_vertices=n, resolution=cfg.resolution, basis=basis,
                      origin_policy=cfg.origin_policy, keep_reconstructions=want_svg)
    report, recons = result if want_svg else (result, None)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if want_svg:
        write_overlays(args.svg_dir, raws, recons, args.svg_limit)
    print(report.format_table())
    return 0


def _read_contour(value, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: contour is not numeric") from None
    if arr.ndim == 2 and arr.shape[1] == 2:
        arr = arr.ravel()
    if arr.ndim != 1 or len(arr) % 2 or not np.all(np.isfinite(arr)):
        raise FormatError(f"{where}: contour must be a flat [x1, y1, ...] or [[x, y], ...] list")
    return arr


def _read_samples(doc: dict) -> list[asg.SamplePrediction]:
    samples = []
    for i, s in enumerate(doc.get("samples", [])):
        try:
            score = float(s["score"])
            loc = (float(s.get("x", 0.0)), float(s.get("y", 0.0)))
            in_tr = bool(s.get("in_tr", True))
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"sample {i}: needs numeric score, x, y") from None
        if not np.isfinite(score):
            raise FormatError(f"sample {i}: score is not finite")
        samples.append(asg.SamplePrediction(loc, score, _read_contour(s.get("contour"), f"sample {i}"), in_tr))
    return samples


def _load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return doc


def cmd_match(args, cfg: Config) -> int:
    doc = _load_json(args.input)
    samples = _read_samples(doc)
    instances = [_read_contour(c, f"instance {j}") for j, c in enumerate(doc.get("instances", []))]
    cm = asg.build_cost_matrix(samples, instances, cfg.lam, cfg.k, metric=args.metric,
                               normalize=args.normalize, alpha=cfg.alpha, gamma=cfg.gamma, eps=cfg.eps)
    res = asg.hungarian_match(cm)
    out = {
        "pairs": [list(p) for p in res.pairs],
        "total_cost": res.total_cost,
        "matched_per_instance": res.matched_per_instance,
        "unmatched_instances": res.unmatched,
        "lambda": cfg.lam,
        "k": cfg.k,
    }
    if args.nms_threshold is not None:
        out["nms_keep"] = asg.polygon_nms(samples, cfg.nms_threshold, cfg.resolution)
    _emit_json(out, args.out)
    return 0


def cmd_nms(args, cfg: Config) -> int:
    samples = _read_samples(_load_json(args.input))
    keep = asg.polygon_nms(samples, cfg.nms_threshold, cfg.resolution)
    _emit_json({"keep": keep, "threshold": cfg.nms_threshold}, args.out)
    return 0


def _emit_json(obj, out) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default overrides")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-vertices", type=int, dest="n_vertices", help="N, vertices per contour")
    common.add_argument("--resolution", type=int, help="IoU raster cells along the longer side")
    common.add_argument("--origin-policy", choices=list(geo.ORIGIN_POLICIES), dest="origin_policy")

    parser = argparse.ArgumentParser(prog="lracontour", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic ribbon corpus")
    _add_synth_flags(p)
    p.add_argument("--format", choices=["polylines", "json"])
    p.add_argument("--out", help="output file (default: PolyLines on stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("learn", parents=[common], help="learn an eigenanchor basis")
    _add_corpus_input(p)
    p.add_argument("--dim", type=int, help="M, number of eigenanchors")
    p.add_argument("--out", required=True, help="basis file to write")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("encode", parents=[common], help="encode contours to a coefficient file")
    _add_corpus_input(p, synthetic=False)
    p.add_argument("--basis", help="basis file (lra codec)")
    p.add_argument("--codec", help="codec spec: lra:M, fourier:K, cheb:K, bezier")
    p.add_argument("--dim", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="decode a coefficient file to contours")
    p.add_argument("coefficients")
    p.add_argument("--basis", help="basis file, needed for lra coefficients")
    p.add_argument("--format", choices=["polylines", "json"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", parents=[common], help="reconstruction IoU report")
    _add_corpus_input(p)
    p.add_argument("--basis", help="basis file; learned from the corpus when omitted")
    p.add_argument("--codecs", help="comma-separated codec specs, e.g. lra:14,fourier:5,cheb:44,bezier")
    p.add_argument("--dims", type=_int_list, help="LRA dims to sweep, e.g. 10,14,18")
    p.add_argument("--dim", type=int, help="default LRA dim")
    p.add_argument("--csv", help="write the report as CSV")
    p.add_argument("--svg-dir", help="write per-contour SVG overlays here")
    p.add_argument("--svg-limit", type=int, default=50, help="max overlays per codec")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("match", parents=[common], help="Hungarian assignment of samples to instances")
    p.add_argument("input", help="JSON {samples: [...], instances: [...]}")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--k", type=int)
    p.add_argument("--metric", choices=["euclidean", "l1"], default="euclidean")
    p.add_argument("--normalize", action="store_true", help="divide the contour distance by N")
    p.add_argument("--nms-threshold", type=float, dest="nms_threshold",
                   help="also report which samples survive polygon NMS")
    p.add_argument("--out")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("nms", parents=[common], help="polygon non-maximum suppression")
    p.add_argument("input", help="JSON {samples: [...]}")
    p.add_argument("--nms-threshold", type=float, dest="nms_threshold")
    p.add_argument("--out")
    p.set_defaults(func=cmd_nms)
    return parser


_CONFIG_KEYS = ("seed", "n_vertices", "resolution", "origin_policy", "dim", "lam", "k", "nms_threshold")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = cfg.update(**{key: getattr(args, key, None) for key in _CONFIG_KEYS})
        return args.func(args, cfg)
    except LraError as exc:
        print(f"lracontour {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"lracontour {args.command}: {exc}", file=sys.stderr)
        return DataError.exit_code
    except ValueError as exc:
        # TOML syntax errors and similar malformed configuration
        print(f"lracontour {args.command}: {exc}", file=sys.stderr)
        return ArgumentError.exit_code


if __name__ == "__main__":
    sys.exit(main())
