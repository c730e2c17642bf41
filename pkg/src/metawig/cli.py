"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 domain error, 3 parse error,
4 resource cap.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import distributions as ds
from . import engine as en
from . import io
from . import quantization as qz
from . import symplectic as sp
from . import verify as vf

EXIT_OK, EXIT_VERIFY, EXIT_DOMAIN, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    n: Optional[int] = None
    dim: Optional[int] = None
    tol: float = 1e-6
    seed: int = 0
    path: str = "auto"
    out: Optional[str] = None
    suite: str = "all"

    def check_grid(self, grid: en.Grid) -> None:
        if self.n is not None and grid.N != self.n:
            raise en.EngineError(f"input grid has N={grid.N}, config asks for N={self.n}")
        if self.dim is not None and grid.dim != self.dim:
            raise en.EngineError(f"input grid has d={grid.dim}, config asks for d={self.dim}")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- generators

def parse_generator(word: str, m: int) -> np.ndarray:
    """Product of comma-separated tokens, leftmost first.

    Tokens: ``J``, ``D_L:s`` (``s I``), ``V_C:c`` and ``V_CT:c`` (``c I``),
    ``A_tau:t``, ``A_ST``, ``A_FT2``.  The ``A_*`` matrices need even ``m``.
    """
    M = np.eye(2 * m)
    tokens = [t.strip() for t in word.split(",") if t.strip()]
    if not tokens:
        raise UsageError("empty generator word")
    for tok in tokens:
        name, _, arg = tok.partition(":")
        try:
            val = float(arg) if arg else None
        except ValueError:
            raise UsageError(f"bad parameter in token {tok!r}") from None
        if name in ("A_tau", "A_ST", "A_FT2") and m % 2:
            raise sp.DimensionError(f"{name} acts on an even number of axes, signal has {m}")
        if name in ("D_L", "V_C", "V_CT", "A_tau") and val is None:
            raise UsageError(f"token {tok!r} needs a parameter")
        if name == "J":
            G = sp.J(m)
        elif name == "D_L":
            G = sp.D(val * np.eye(m))
        elif name == "V_C":
            G = sp.V(val * np.eye(m))
        elif name == "V_CT":
            G = sp.VT(val * np.eye(m))
        elif name == "A_tau":
            G = sp.A_tau(val, m // 2)
        elif name == "A_ST":
            G = sp.A_ST(m // 2)
        elif name == "A_FT2":
            G = sp.A_FT2(m // 2)
        else:
            raise UsageError(f"unknown generator token {name!r}")
        M = M @ G
    return M


def _load_matrix(args, m: int) -> np.ndarray:
    if args.generator:
        return parse_generator(args.generator, m)
    if not args.matrix:
        raise UsageError("give a matrix JSON file or --generator")
    return io.read_matrix(args.matrix)


def _require_symplectic(A) -> None:
    rep = sp.check_symplectic(A)
    if not rep.ok:
        raise sp.NotSymplecticError("; ".join(rep.failures) or "matrix is not symplectic")


# ------------------------------------------------------------------ commands

def cmd_classify(args, cfg: RunConfig) -> int:
    A = io.read_matrix(args.matrix)
    c = sp.classify(A)
    doc = {"matrix": np.asarray(A).tolist(), "classification": c.to_dict()}
    _emit(doc, cfg.out)
    return EXIT_OK if c.is_symplectic else EXIT_DOMAIN


def cmd_transform(args, cfg: RunConfig) -> int:
    f = io.read_signal(args.signal)
    cfg.check_grid(f.grid)
    A = _load_matrix(args, f.grid.dim)
    _require_symplectic(A)
    if A.shape[0] != 2 * f.grid.dim:
        raise sp.DimensionError(f"matrix is {A.shape[0]}x{A.shape[0]}, signal has "
                                f"{f.grid.dim} axes")
    path = "word" if cfg.path in ("auto", "fast") else cfg.path
    if path == "dense":
        U = en.dense_matrix_of(A, f.grid, path="word").matrix
        out = (U @ f.values.ravel()).reshape(f.grid.shape)
    else:
        out = en.apply_values(A, f.values, f.grid.dim, path=path)
    h = f.replace(out)
    defect = abs(h.norm() / f.norm() - 1) if f.norm() > 0 else 0.0
    if cfg.out:
        io.write_signal(cfg.out, h)
    print(f"unitarity: | ||out|| / ||in|| - 1 | = {defect:.3e} (tol {cfg.tol:g})")
    return EXIT_OK if defect <= cfg.tol else EXIT_VERIFY


def cmd_distribution(args, cfg: RunConfig) -> int:
    f = io.read_signal(args.f)
    g = io.read_signal(args.g) if args.g else f
    cfg.check_grid(f.grid)
    if g.grid.shape != f.grid.shape:
        raise en.EngineError("f and g live on different grids")
    A = _load_matrix(args, 2 * f.grid.dim)
    _require_symplectic(A)
    if A.shape[0] != 4 * f.grid.dim:
        raise sp.DimensionError(f"matrix is {A.shape[0]}x{A.shape[0]}, need "
                                f"{4 * f.grid.dim} for {f.grid.dim}-axis signals")
    W = ds.metaplectic_wigner(A, f, g, path=cfg.path)
    moyal = abs(W.norm() ** 2 - (f.norm() * g.norm()) ** 2) / max((f.norm() * g.norm()) ** 2,
                                                                  1e-300)
    if cfg.out:
        io.write_distribution(cfg.out, W, {"moyal_defect": moyal})
    print(f"moyal: | ||W||^2 / (||f|| ||g||)^2 - 1 | = {moyal:.3e} (tol {cfg.tol:g})")
    return EXIT_OK if moyal <= cfg.tol else EXIT_VERIFY


def cmd_quantize(args, cfg: RunConfig) -> int:
    sym = io.read_distribution(args.symbol)
    if sym.grid.dim % 2:
        raise en.EngineError("symbol must live on phase space (even number of axes)")
    grid = en.Grid(sym.grid.N, sym.grid.dim // 2)
    cfg.check_grid(grid)
    if args.weyl:
        op = qz.op_weyl(sym, grid)
    else:
        A = _load_matrix(args, 2 * grid.dim)
        _require_symplectic(A)
        op = qz.op_general(A, sym, grid, assembly=args.assembly)
    if cfg.out:
        io.write_operator(cfg.out, op.matrix, {"A": np.asarray(op.A).tolist(),
                                               "grid": grid.to_dict(),
                                               "symbol_provenance": sym.provenance,
                                               **op.provenance})
    print(f"operator: {op.matrix.shape[0]}x{op.matrix.shape[1]}, "
          f"max |entry| = {np.max(np.abs(op.matrix)):.3e}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    rep = vf.run_suite(cfg.suite, cfg.seed, progress=print)
    elapsed = time.perf_counter() - t0
    doc = rep.to_dict(deterministic=True)
    if cfg.out:
        io.write_json(cfg.out, doc)
    n_fail = sum(not c["passed"] for c in rep.checks)
    print(f"suite {cfg.suite}: {len(rep.checks) - n_fail}/{len(rep.checks)} checks passed "
          f"(seed {cfg.seed})")
    print(f"runtime {elapsed:.1f} s", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _emit(doc: dict, out: Optional[str]) -> None:
    if out:
        io.write_json(out, doc)
    else:
        sys.stdout.write(io.dumps_json(doc))


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="grid size N (checked against inputs)")
    common.add_argument("--dim", type=int, help="signal dimension d (checked against inputs)")
    common.add_argument("--tol", type=float, default=1e-6, help="diagnostic tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--path", default="auto", choices=("auto", "dense", "word", "fast",
                                                            "general"))
    common.add_argument("--out", help="output file")

    p = argparse.ArgumentParser(prog="metawig",
                                description="Metaplectic Wigner distributions on finite grids.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify a symplectic matrix")
    c.add_argument("matrix")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("transform", parents=[common], help="apply mu(A) to a signal")
    t.add_argument("signal")
    t.add_argument("matrix", nargs="?")
    t.add_argument("--generator", help="generator word, e.g. 'J,D_L:2,V_C:0.5'")
    t.set_defaults(func=cmd_transform)

    d = sub.add_parser("distribution", parents=[common], help="compute W_A(f, g)")
    d.add_argument("f")
    d.add_argument("g", nargs="?")
    d.add_argument("--matrix")
    d.add_argument("--generator", help="generator word, e.g. 'A_tau:0.5'")
    d.set_defaults(func=cmd_distribution)

    q = sub.add_parser("quantize", parents=[common], help="assemble Op_A(a) from a symbol CSV")
    q.add_argument("symbol")
    q.add_argument("--matrix")
    q.add_argument("--generator")
    q.add_argument("--weyl", action="store_true", help="Weyl quadrature reference")
    q.add_argument("--assembly", default="kernel", choices=("kernel", "duality"))
    q.set_defaults(func=cmd_quantize)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--suite", default="all", choices=sorted(vf.SUITES))
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    cfg = RunConfig(n=args.n, dim=args.dim, tol=args.tol, seed=args.seed, path=args.path,
                    out=args.out, suite=getattr(args, "suite", "all"))
    try:
        return args.func(args, cfg)
    except (io.FormatError, UsageError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except en.ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (sp.SymplecticError, en.EngineError, ds.DistributionError,
            qz.QuantizationError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
