"""Gabor frame bounds of a Gaussian window over lattice steps."""
import argparse
from pathlib import Path

from metawig import analysis as an
from metawig import engine as en
from metawig import io


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    grid = en.Grid(args.n)
    g = en.gaussian(grid)
    rows = []
    steps = [s for s in range(1, args.n + 1) if args.n % s == 0]
    for a in steps:
        for b in steps:
            spec = an.FrameSpec(g, a, b)
            lo, hi = an.frame_bounds(spec)
            rows.append({"a": a, "b": b, "density": spec.density, "A": lo, "B": hi})
            if spec.density >= 0.5:
                print(f"a={a:2d} b={b:2d} density={spec.density:6.3f}  A={lo:.3e}  B={hi:.3e}")
    io.write_json(Path(args.out) / "frames.json", {"N": args.n, "rows": rows})


if __name__ == "__main__":
    main()
