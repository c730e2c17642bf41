"""Discretization error against grid size for the main evaluation paths.

Writes ``convergence.csv`` with one row per (quantity, N).
"""
import argparse
import csv
import io as _io
from pathlib import Path

import numpy as np

from metawig import distributions as ds
from metawig import engine as en
from metawig import io
from metawig import quantization as qz
from metawig import symplectic as sp
from metawig.verify import COARSE_SYMBOLS, fast_family


def gaussian_wigner(N, path):
    g = en.Grid(N)
    phi = en.gaussian(g)
    X, XI = g.with_dim(2).coords()
    W = ds.metaplectic_wigner(sp.A_tau(0.5), phi, phi, path=path).values
    return en.align_phase(W, 2 * np.exp(-2 * np.pi * (X ** 2 + XI ** 2)))[0]


def tau_direct(N, tau=0.3):
    g = en.Grid(N)
    f, h = en.gaussian(g, center=0.1), en.gaussian(g, freq=-0.2)
    W = ds.metaplectic_wigner(sp.A_tau(tau), f, h, path="word").values
    return en.align_phase(W, ds.tau_wigner(tau, f, h).values)[0]


def fast_vs_dense(N, rng):
    f = en.gaussian(en.Grid(N))
    return max(en.align_phase(ds.metaplectic_wigner(A, f, f, path="fast").values,
                              ds.metaplectic_wigner(A, f, f, path="dense").values)[0]
               for A in fast_family(rng, 3))


def weyl_vs_general(N):
    g = en.Grid(N)
    worst = 0.0
    for fn in COARSE_SYMBOLS:
        a = qz.symbol_from_function(fn, g)
        worst = max(worst, np.max(np.abs(qz.op_general(sp.A_tau(0.5), a, g).matrix
                                          - qz.op_weyl(a, g).matrix)))
    return worst


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    rows = []
    for N in (16, 32, 64):
        rows.append(("gaussian_wigner_word", N, gaussian_wigner(N, "word")))
        rows.append(("gaussian_wigner_fast", N, gaussian_wigner(N, "fast")))
        rows.append(("tau_0.3_word_vs_direct", N, tau_direct(N)))
        rows.append(("weyl_vs_general", N, weyl_vs_general(N)))
    for N in (8, 16):
        rows.append(("fast_vs_dense", N, fast_vs_dense(N, rng)))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "N", "error"])
    for q, N, e in rows:
        w.writerow([q, N, f"{e:.6e}"])
        print(f"{q:28s} N={N:3d}  {e:.3e}")
    io.atomic_write(Path(args.out) / "convergence.csv", buf.getvalue())


if __name__ == "__main__":
    main()
