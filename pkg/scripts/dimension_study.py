#!/usr/bin/env python3
"""Mean reconstruction IoU of the eigenanchor codec as a function of M.

Uses the seeded synthetic corpus unless an annotation file is given.

    python scripts/dimension_study.py --dims 2,4,6,8,10,14,18,24,32,64 --csv dims.csv
"""
import argparse
import time
from pathlib import Path

from lracontour import codecs as cdx
from lracontour import corpus as cp
from lracontour import lra
from lracontour.evaluate import evaluate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("corpus", nargs="?", help="annotation file or directory (default: synthetic)")
    ap.add_argument("--format", choices=sorted(cp.FORMATS))
    ap.add_argument("--count", type=int, default=2000, help="synthetic corpus size")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-vertices", type=int, default=32)
    ap.add_argument("--resolution", type=int, default=512)
    ap.add_argument("--dims", default="10,14,18,64")
    ap.add_argument("--csv")
    args = ap.parse_args()

    t0 = time.perf_counter()
    if args.corpus:
        raws = cp.read_contours(args.corpus, args.format)
    else:
        raws = cp.synthesize_contours(cp.SynthParams(count=args.count, seed=args.seed))
    corpus = cp.build_corpus(raws, args.n_vertices)
    dims = sorted({int(d) for d in args.dims.split(",")})
    basis = lra.learn_basis(corpus, max(dims))
    report = evaluate([cdx.CodecSpec("lra", m) for m in dims], raws, n_vertices=args.n_vertices,
                      resolution=args.resolution, basis=basis)
    print(report.format_table())
    energy = basis.sigma ** 2
    total = energy.sum()
    print("\n   M  energy kept")
    for m in dims:
        print(f"{m:>4}  {energy[:m].sum() / total:.6f}")
    print(f"\n{len(raws)} contours, {time.perf_counter() - t0:.1f}s")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())


if __name__ == "__main__":
    main()
