"""Acceptance suite.

Each ``criterion_*`` function returns a list of check records.  A check passes
when its margin is non-negative; ``run_suite`` aggregates them into a JSON-ready
report.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import analysis as an
from . import distributions as ds
from . import engine as en
from . import quantization as qz
from . import symplectic as sp


def check(criterion: int, name: str, value: float, bound: float, upper: bool = True,
          **extra) -> dict:
    """``upper``: pass iff ``value <= bound``; otherwise pass iff ``value >= bound``."""
    value = float(value)
    margin = bound - value if upper else value - bound
    out = {"criterion": criterion, "name": name, "value": value, "bound": float(bound),
           "margin": float(margin), "passed": bool(margin >= 0)}
    out.update(extra)
    return out


def flag(criterion: int, name: str, ok: bool, **extra) -> dict:
    out = {"criterion": criterion, "name": name, "value": float(ok), "bound": 1.0,
           "margin": 0.0 if ok else -1.0, "passed": bool(ok)}
    out.update(extra)
    return out


def _random_signal(grid: en.Grid, rng: np.random.Generator) -> en.Signal:
    return en.Signal(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def _random_gaussian(grid: en.Grid, rng: np.random.Generator) -> en.Signal:
    return en.gaussian(grid, center=rng.uniform(-0.5, 0.5, grid.dim),
                       freq=rng.uniform(-0.5, 0.5, grid.dim), width=rng.uniform(0.7, 1.4))


def _unit(f: en.Signal) -> en.Signal:
    return f.replace(f.values / f.norm())


# ------------------------------------------------------------- criteria

def criterion_1(rng: np.random.Generator) -> list:
    """Unitarity of generator words, the general path and the dense oracle."""
    t0 = time.perf_counter()
    out = []
    g1, g2 = en.Grid(32), en.Grid(16, 2)
    words = [sp.J(1), sp.D([[2.0]]), sp.D([[-0.6]]), sp.V([[0.7]]), sp.VT([[-1.3]])]
    words += [sp.random_symplectic(rng, 1) for _ in range(5)]
    words2 = [sp.J(2), sp.A_tau(0.3), sp.A_ST(), sp.A_FT2(1)]
    words2 += [sp.random_symplectic(rng, 2) for _ in range(3)]
    worst = 0.0
    for A, grid in [(A, g1) for A in words] + [(A, g2) for A in words2]:
        f = _random_signal(grid, rng)
        v = en.apply_values(A, f.values, grid.dim, path="word")
        worst = max(worst, abs(np.linalg.norm(v) / np.linalg.norm(f.values) - 1))
    out.append(check(1, "word_norm_defect", worst, 1e-9))
    worst = 0.0
    for _ in range(5):
        A = sp.random_symplectic(rng, 1)
        f = _random_signal(g1, rng)
        h = en.apply_general(A, f)
        worst = max(worst, abs(h.norm() / f.norm() - 1))
    out.append(check(1, "general_norm_defect", worst, 1e-9))
    worst = 0.0
    for N in (16, 32):
        for path in ("general", "word"):
            A = sp.random_symplectic(rng, 1)
            worst = max(worst, en.dense_matrix_of(A, en.Grid(N), path=path).unitarity_defect)
    out.append(check(1, "dense_unitarity_defect", worst, 1e-9))
    out.append(check(1, "runtime_s", time.perf_counter() - t0, 10.0, timing=True))
    return out


def criterion_2(rng: np.random.Generator) -> list:
    """Polarized Moyal identity over 20 seeded quadruples."""
    grid = en.Grid(32)
    mats = {"A_ST": sp.A_ST(), "A_1/4": sp.A_tau(0.25), "A_1/2": sp.A_tau(0.5),
            "random_word": sp.random_symplectic(rng, 2)}
    out = []
    for name, A in mats.items():
        worst = 0.0
        for _ in range(20):
            f1, g1, f2, g2 = (_random_signal(grid, rng) for _ in range(4))
            worst = max(worst, ds.moyal_defect(A, f1, g1, f2, g2, path="word"))
        out.append(check(2, f"moyal_{name}", worst, 1e-6))
    return out


def _gaussian_pairs(grid: en.Grid) -> list:
    G = en.gaussian
    return [(G(grid, center=0.1), G(grid, freq=-0.1)),
            (G(grid, center=-0.2, freq=0.1), G(grid, center=0.1)),
            (G(grid, width=0.9), G(grid, center=0.2, freq=-0.1, width=1.1))]


def criterion_3(rng: np.random.Generator) -> list:
    """``W_{A_ST}`` is the STFT and ``W_{A_tau}`` the direct tau-Wigner."""
    grid = en.Grid(32)
    out = []
    worst = 0.0
    for f, g in _gaussian_pairs(grid):
        W = ds.metaplectic_wigner(sp.A_ST(), f, g, path="word").values
        worst = max(worst, en.align_phase(W, ds.stft(f, g).values)[0])
    out.append(check(3, "A_ST_vs_stft", worst, 1e-5))
    for tau in (0.0, 0.3, 0.5, 1.0):
        worst = 0.0
        for f, g in _gaussian_pairs(grid):
            W = ds.metaplectic_wigner(sp.A_tau(tau), f, g, path="word").values
            worst = max(worst, en.align_phase(W, ds.tau_wigner(tau, f, g).values)[0])
        out.append(check(3, f"A_tau_{tau:g}_vs_direct", worst, 1e-5))
    return out


def criterion_4(rng: np.random.Generator) -> list:
    """Gaussian Wigner closed form and the Rihaczek product formula."""
    grid = en.Grid(64)
    phi = en.gaussian(grid)
    X, XI = grid.with_dim(2).coords()
    ref = 2 * np.exp(-2 * np.pi * (X ** 2 + XI ** 2))
    W = ds.metaplectic_wigner(sp.A_tau(0.5), phi, phi, path="word").values
    out = [check(4, "gaussian_wigner_word", en.align_phase(W, ref)[0], 1e-5),
           check(4, "gaussian_wigner_direct", np.max(np.abs(ds.wigner(phi).values - ref)), 1e-5)]
    g32 = en.Grid(32)
    worst = 0.0
    for _ in range(5):
        f, g = _random_signal(g32, rng), _random_signal(g32, rng)
        R = ds.metaplectic_wigner(sp.A_tau(0.0), f, g, path="word").values
        prod = ds.rihaczek(f, g).values
        worst = max(worst, en.align_phase(R, prod)[0] / np.max(np.abs(prod)))
    out.append(check(4, "rihaczek_product", worst, 1e-8))
    return out


def fast_family(rng: np.random.Generator, count: int = 10) -> list:
    """``V_C A_FT2 D_L`` with Haar-orthogonal right-regular ``L`` and ``C`` with
    vanishing off-diagonal block."""
    out = []
    while len(out) < count:
        Q, R = np.linalg.qr(rng.normal(size=(2, 2)))
        L = Q * np.sign(np.diag(R))
        if np.min(np.abs(L)) < 0.2:
            continue
        C = np.diag(rng.uniform(-0.5, 0.5, 2))
        A = sp.V(C) @ sp.A_FT2(1) @ sp.D(L)
        if ds.fast_available(A):
            out.append(A)
    return out


def criterion_5(rng: np.random.Generator) -> list:
    grid = en.Grid(16)
    f = en.gaussian(grid)
    worst = 0.0
    for A in fast_family(rng):
        fast = ds.metaplectic_wigner(A, f, f, path="fast").values
        dense = ds.metaplectic_wigner(A, f, f, path="dense").values
        worst = max(worst, en.align_phase(fast, dense)[0])
    return [check(5, "fast_vs_dense", worst, 1e-5)]


TRUTH_TABLE = {
    # name: (covariant, shift_invertible, wigner_decomposable)
    "A_tau_0": (True, False, True),
    "A_tau_0.3": (True, True, True),
    "A_tau_0.5": (True, True, True),
    "A_tau_1": (True, False, True),
    "A_ST": (False, True, True),
    "A_FT2": (False, False, True),
    "J_2d": (False, False, False),
    "identity": (False, False, False),
}


def truth_matrices() -> dict:
    return {"A_tau_0": sp.A_tau(0.0), "A_tau_0.3": sp.A_tau(0.3), "A_tau_0.5": sp.A_tau(0.5),
            "A_tau_1": sp.A_tau(1.0), "A_ST": sp.A_ST(), "A_FT2": sp.A_FT2(1),
            "J_2d": sp.J(2), "identity": np.eye(4)}


def criterion_6(rng: np.random.Generator) -> list:
    """Classification truth table and shift-invertibility trials."""
    out = []
    mats = truth_matrices()
    agree = 0
    for name, A in mats.items():
        c = sp.classify(A)
        got = (c.is_covariant, c.is_shift_invertible, c.is_wigner_decomposable)
        agree += got == TRUTH_TABLE[name]
    out.append(check(6, "truth_table_agreement", agree / len(mats), 1.0, upper=False))
    grid = en.Grid(32)
    f, g = en.gaussian(grid, center=0.1), en.gaussian(grid, freq=-0.2)
    worst = 0.0
    for A, ws, path in [(sp.A_ST(), [(1, -1), (3, 2)], "word"),
                        (sp.A_tau(0.5), [(2, 2), (-4, 2)], "fast")]:
        for w in ws:
            worst = max(worst, ds.shift_invertibility_trial(A, f, g, w, path=path)["value"])
    out.append(check(6, "shift_invertibility_trials", worst, 1e-6))
    return out


def criterion_7(rng: np.random.Generator) -> list:
    out = []
    B = sp.cohen_matrix(sp.A_tau(0.5))
    out.append(check(7, "B_A_half_zero", np.max(np.abs(B)), 0.0))
    grid = en.Grid(32)
    f, g = en.gaussian(grid, center=0.1), en.gaussian(grid, freq=-0.1)
    W = ds.metaplectic_wigner(sp.A_tau(0.5), f, g, path="word")
    for tau in (0.25, 0.75):
        conv = ds.cohen_apply(W, ds.cohen_kernel(sp.A_tau(tau), grid)).values
        ref = ds.metaplectic_wigner(sp.A_tau(tau), f, g, path="word").values
        out.append(check(7, f"cohen_tau_{tau:g}", en.align_phase(conv, ref)[0], 1e-3))
    worst = 0.0
    covs = [sp.A_tau(t) for t in (0.0, 0.25, 0.3, 0.5, 0.75, 1.0)]
    for _ in range(4):
        a11 = rng.normal()
        a13, a21 = rng.normal(size=2)
        M = sp.covariant_pattern(sp.from_blocks([[np.array([[a11]]), np.zeros((1, 1)),
                                                  np.array([[a13]]), np.zeros((1, 1))],
                                                 [np.array([[a21]])] + [np.zeros((1, 1))] * 3,
                                                 [np.zeros((1, 1))] * 4,
                                                 [np.zeros((1, 1))] * 4]))
        covs.append(M)
    for A in covs:
        Bc = sp.cohen_matrix(A)
        worst = max(worst, np.max(np.abs(sp.VT(Bc) @ sp.A_tau(0.5) - A)))
    out.append(check(7, "cohen_reconstruction", worst, 1e-10))
    return out


def criterion_8(rng: np.random.Generator) -> list:
    out = []
    worst = 0.0
    for A in [sp.A_tau(t) for t in (0.2, 0.3, 0.5, 0.8)] + [sp.A_ST()] + fast_family(rng, 3):
        worst = max(worst, abs(an.lieb_constants(A, 2).derived_constant - 1))
    out.append(check(8, "derived_constant_p2", worst, 0.0))
    grid = en.Grid(64)
    phi = en.gaussian(grid)
    r = an.lieb_check(sp.A_tau(0.5), phi, phi, 4)
    out.append(check(8, "gaussian_attains_p4", abs(r["value"] / 2 ** 0.25 - 1), 0.01))
    g32 = en.Grid(32)
    for p in (1, 4):
        worst = np.inf
        for k in range(100):
            gen = _random_signal if k % 2 else _random_gaussian
            f, g = gen(g32, rng), gen(g32, rng)
            worst = min(worst, an.lieb_check(sp.A_tau(0.3), f, g, p)["margin"])
        out.append(check(8, f"lieb_random_pairs_p{p}", worst, 0.0, upper=False))
    pairs = [(phi, phi), (en.gaussian(grid, center=0.2), en.gaussian(grid, freq=-0.2)),
             (_unit(en.gaussian(grid, width=0.8)), _unit(en.gaussian(grid, width=1.25)))]
    for eps in (0.1, 0.5):
        worst = np.inf
        for f, g in pairs:
            worst = min(worst, an.weak_uncertainty(sp.A_tau(0.5), f, g, eps)["margin"])
        out.append(check(8, f"weak_uncertainty_eps{eps:g}", worst, 0.0, upper=False))
    return out


def _gauss_symbol(grid: en.Grid, chirp: float = 0.0):
    return qz.symbol_from_function(
        lambda X, XI: np.exp(-np.pi * (X[0] ** 2 + XI[0] ** 2) + 1j * np.pi * chirp * X[0] ** 2),
        grid)


def _g2(X, XI, s=1.0):
    return np.exp(-np.pi * s * (X[0] ** 2 + XI[0] ** 2))


# symbols whose spectrum is resolved at N = 16 to about 1e-6
RESOLVED_SYMBOLS = [
    lambda X, XI: _g2(X, XI),
    lambda X, XI: X[0] * XI[0] * _g2(X, XI),
    lambda X, XI: (X[0] + 1j * XI[0]) * _g2(X, XI),
    lambda X, XI: _g2(X, XI) * np.exp(0.25j * np.pi * X[0] ** 2),
]
# coarser spectra: the two discretizations only meet to ~1e-5 at N = 16
COARSE_SYMBOLS = [
    lambda X, XI: _g2(X, XI, 1.5),
    lambda X, XI: _g2(X, XI) * np.exp(0.5j * np.pi * X[0] ** 2),
    lambda X, XI: (1 + X[0] ** 2 - XI[0]) * _g2(X, XI, 1.3),
    lambda X, XI: np.exp(-np.pi * ((X[0] - 0.3) ** 2 + (XI[0] + 0.2) ** 2)),
    lambda X, XI: _g2(X, XI) * np.exp(1j * np.pi * XI[0]),
]


def criterion_9(rng: np.random.Generator) -> list:
    out = []
    grid = en.Grid(16)
    syms = [_gauss_symbol(grid), _gauss_symbol(grid, 0.5)]
    for name, n, fns in (("weyl_equivalence", 16, RESOLVED_SYMBOLS),
                         ("weyl_equivalence_n32", 32, RESOLVED_SYMBOLS + COARSE_SYMBOLS)):
        g = en.Grid(n)
        worst = 0.0
        for fn in fns:
            a = qz.symbol_from_function(fn, g)
            G = qz.op_general(sp.A_tau(0.5), a, g).matrix
            W = qz.op_weyl(a, g).matrix
            worst = max(worst, np.max(np.abs(G - W)))
        out.append(check(9, name, worst, 1e-6))
    worst = 0.0
    for fn in (RESOLVED_SYMBOLS[0], RESOLVED_SYMBOLS[1], COARSE_SYMBOLS[0], COARSE_SYMBOLS[2]):
        W = qz.op_weyl(qz.symbol_from_function(fn, grid), grid).matrix
        worst = max(worst, np.max(np.abs(W - W.conj().T)))
    out.append(check(9, "weyl_real_symbol_selfadjoint", worst, 1e-8))
    one = qz.constant_symbol(grid)
    worst = 0.0
    for tau in (0.0, 0.3, 0.5, 1.0):
        M = qz.op_general(sp.A_tau(tau), one, grid).matrix
        worst = max(worst, np.max(np.abs(M - np.eye(grid.size))))
    out.append(check(9, "op_one_identity", worst, 1e-8))
    worst = 0.0
    worst_op = 0.0
    A, B = sp.A_tau(0.5), sp.random_symplectic(rng, 2)
    for a in syms:
        b = qz.change_quantization(A, B, a)
        back = qz.change_quantization(B, A, b)
        worst = max(worst, np.max(np.abs(back.values - a.values)))
        OA = qz.op_general(A, a, grid).matrix
        OB = qz.op_general(B, b, grid).matrix
        worst_op = max(worst_op, en.align_phase(OB, OA)[0])
    out.append(check(9, "change_of_quantization_roundtrip", worst, 1e-7))
    out.append(check(9, "change_of_quantization_operator", worst_op, 1e-7))
    worst = 0.0
    for A in (sp.A_tau(0.5), sp.A_ST(), sp.A_tau(0.3)):
        for a in syms:
            worst = max(worst, qz.assembly_defect(A, a, grid))
    out.append(check(9, "kernel_vs_duality", worst, 1e-6))
    f, g = en.gaussian(grid, center=0.1), en.gaussian(grid, freq=-0.1)
    for name, A in (("A_1/2", sp.A_tau(0.5)), ("A_ST", sp.A_ST())):
        worst = max(qz.intertwining_check(A, a, f, g)["value"] for a in syms)
        out.append(check(9, f"intertwining_{name}", worst, 1e-4))
    return out


def criterion_10(rng: np.random.Generator) -> list:
    grid = en.Grid(16)
    imp = _unit(en.impulse(grid))
    lo, hi = an.frame_bounds(an.FrameSpec(imp, 1, grid.N))
    out = [check(10, "impulse_bounds", max(abs(lo - 1), abs(hi - 1)), 1e-12)]
    spec = an.FrameSpec(en.gaussian(grid), 2, 2)
    lo, hi = an.frame_bounds(spec)
    out.append(check(10, "gaussian_lower_bound", lo, 0.0, upper=False, B=hi))
    worst = max(an.frame_reconstruction_error(spec, _random_signal(grid, rng)) for _ in range(5))
    out.append(check(10, "dual_reconstruction", worst, 1e-8))
    lo, _ = an.frame_bounds(an.FrameSpec(en.gaussian(grid), 4, 8))
    out.append(check(10, "oversparse_lower_bound", lo, 1e-10))
    return out


def criterion_norms(rng: np.random.Generator) -> list:
    """Exact norm relations for decomposable matrices (reported with criterion 8)."""
    grid = en.Grid(32)
    out = []
    for name, A, p in (("A_ST_p2", sp.A_ST(), 2), ("A_1/2_p2", sp.A_tau(0.5), 2),
                       ("A_0.3_p1", sp.A_tau(0.3), 1)):
        r = an.norm_relation_report(A, grid=grid, p=p)
        out.append(check(8, f"norm_relation_{name}", r["value"], r["bound"],
                         ratio_spread=r["ratio_spread"]))
    return out


CRITERIA: dict[int, Callable] = {1: criterion_1, 2: criterion_2, 3: criterion_3,
                                 4: criterion_4, 5: criterion_5, 6: criterion_6,
                                 7: criterion_7, 8: criterion_8, 9: criterion_9,
                                 10: criterion_10}

SUITES = {
    "core": [6],
    "engine": [1],
    "dist": [2, 3, 4, 5, 7],
    "analysis": [8, "norms", 10],
    "quant": [9],
}
SUITES["all"] = SUITES["core"] + SUITES["engine"] + SUITES["dist"] + SUITES["analysis"] \
    + SUITES["quant"]


@dataclass
class SuiteReport:
    suite: str
    seed: int
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self, deterministic: bool = False) -> dict:
        """With ``deterministic`` the wall-clock values are dropped so that equal
        seeds give identical reports."""
        checks = self.checks
        if deterministic:
            checks = [{k: v for k, v in c.items() if not (c.get("timing") and
                                                          k in ("value", "margin"))}
                      for c in checks]
            return {"suite": self.suite, "seed": self.seed, "passed": self.passed,
                    "checks": checks}
        return {"suite": self.suite, "seed": self.seed, "passed": self.passed,
                "checks": checks, "timings": self.timings}


def run_criterion(key, seed: int) -> list:
    rng = np.random.default_rng([seed, _key_int(key)])
    fn = criterion_norms if key == "norms" else CRITERIA[key]
    return fn(rng)


def _key_int(key) -> int:
    return 100 if key == "norms" else int(key)


def run_suite(suite: str = "all", seed: int = 0,
              progress: Optional[Callable[[str], None]] = None) -> SuiteReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {sorted(SUITES)}")
    rep = SuiteReport(suite, seed)
    for key in SUITES[suite]:
        t0 = time.perf_counter()
        try:
            checks = run_criterion(key, seed)
        except Exception as exc:   # failures are report entries
            checks = [{"criterion": _key_int(key), "name": "exception", "value": None,
                       "bound": None, "margin": None, "passed": False,
                       "error": f"{type(exc).__name__}: {exc}"}]
        rep.timings[str(key)] = time.perf_counter() - t0
        rep.checks.extend(checks)
        if progress:
            for c in checks:
                progress(_line(c))
    return rep


def _line(c: dict) -> str:
    status = "PASS" if c["passed"] else "FAIL"
    if c.get("error"):
        return f"[{status}] criterion {c['criterion']}: {c['name']} ({c['error']})"
    return (f"[{status}] criterion {c['criterion']}: {c['name']} value={c['value']:.3e} "
            f"bound={c['bound']:.3e} margin={c['margin']:.3e}")
