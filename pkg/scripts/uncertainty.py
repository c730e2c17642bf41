"""Energy-concentration measure of Gaussian Wigner distributions against the floors."""
import argparse
from pathlib import Path

from metawig import analysis as an
from metawig import engine as en
from metawig import io
from metawig import symplectic as sp


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    grid = en.Grid(args.n)
    phi = en.gaussian(grid)
    rows = []
    for name, A in (("A_1/2", sp.A_tau(0.5)), ("A_0.3", sp.A_tau(0.3)), ("A_ST", sp.A_ST())):
        for eps in (0.05, 0.1, 0.25, 0.5, 0.75):
            r = an.weak_uncertainty(A, phi, phi, eps)
            floors = {f["quantity"]: f["bound"] for f in r["floors"]}
            rows.append({"matrix": name, "eps": eps, "measure": r["value"], "floors": floors,
                         "printed_floors": r["printed_floors"], "passed": r["passed"]})
            fl = "  ".join(f"{k}={v:.4f}" for k, v in floors.items())
            print(f"{name:6s} eps={eps:<5} |U|={r['value']:.4f}  {fl}  "
                  f"printed={r['printed_floors']['printed']:.4f}")
    io.write_json(Path(args.out) / "uncertainty.json", {"N": args.n, "rows": rows})


if __name__ == "__main__":
    main()
