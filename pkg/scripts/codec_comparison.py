#!/usr/bin/env python3
"""Compare contour codecs on one corpus: eigenanchors, Bezier, Fourier, Chebyshev.

    python scripts/codec_comparison.py --count 2000 --csv codecs.csv --svg-dir overlays
"""
import argparse
import time
from pathlib import Path

from lracontour import codecs as cdx
from lracontour import corpus as cp
from lracontour import lra
from lracontour.evaluate import evaluate, write_overlays

DEFAULT_CODECS = "lra:14,bezier,fourier:5,cheb:44"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("corpus", nargs="?", help="annotation file or directory (default: synthetic)")
    ap.add_argument("--format", choices=sorted(cp.FORMATS))
    ap.add_argument("--basis", help="basis file; learned from the corpus when omitted")
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--straight-fraction", type=float, default=cp.SynthParams.straight_fraction)
    ap.add_argument("--n-vertices", type=int, default=32)
    ap.add_argument("--resolution", type=int, default=512)
    ap.add_argument("--codecs", default=DEFAULT_CODECS)
    ap.add_argument("--csv")
    ap.add_argument("--svg-dir")
    ap.add_argument("--svg-limit", type=int, default=20)
    args = ap.parse_args()

    t0 = time.perf_counter()
    if args.corpus:
        raws = cp.read_contours(args.corpus, args.format)
    else:
        raws = cp.synthesize_contours(cp.SynthParams(count=args.count, seed=args.seed,
                                                     straight_fraction=args.straight_fraction))
    specs = [cdx.parse_codec_spec(s) for s in args.codecs.split(",")]
    lra_dims = [s.param for s in specs if s.kind == "lra"]
    basis = None
    if lra_dims:
        basis = lra.load_basis(args.basis) if args.basis else \
            lra.learn_basis(cp.build_corpus(raws, args.n_vertices), max(lra_dims))
    report, recons = evaluate(specs, raws, n_vertices=args.n_vertices, resolution=args.resolution,
                              basis=basis, keep_reconstructions=True)
    ranked = sorted(report.rows, key=lambda r: -r.mean_iou)
    print(report.format_table())
    print("\nranking: " + " > ".join(f"{r.codec}{r.dim} ({r.mean_iou:.4f})" for r in ranked))
    print(f"{len(raws)} contours, {time.perf_counter() - t0:.1f}s")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.svg_dir:
        write_overlays(args.svg_dir, raws, recons, args.svg_limit)


if __name__ == "__main__":
    main()
