"""Mixed and modulation norms, Gabor frames, norm relations and uncertainty bounds.

All integrals are Riemann sums on the grid with the cell volume as weight, so
discrete norms approximate their continuum counterparts for signals that are
concentrated inside the box.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import distributions as ds
from . import engine as en
from . import symplectic as sp


class AnalysisError(ValueError):
    pass


def report(quantity: str, value: float, bound: Optional[float] = None,
           margin: Optional[float] = None, asserted: bool = False, **extra) -> dict:
    """Uniform result record: ``margin >= 0`` means the assertion holds."""
    out = {"quantity": quantity, "value": float(value),
           "bound": None if bound is None else float(bound),
           "margin": None if margin is None else float(margin),
           "asserted": bool(asserted)}
    if asserted:
        out["passed"] = bool(margin is not None and margin >= 0)
    out.update(extra)
    return out


# ------------------------------------------------------------- mixed norms

def _check_exponent(p: float, name: str) -> float:
    p = float(p)
    if not p > 0:
        raise AnalysisError(f"exponent {name} must be positive, got {p}")
    return p


@dataclass(frozen=True)
class MixedNormSpec:
    p: float = 2.0
    q: float = 2.0
    s: float = 0.0

    def __post_init__(self):
        _check_exponent(self.p, "p")
        _check_exponent(self.q, "q")


def weight(grid: en.Grid, s: float) -> np.ndarray:
    """``(1 + |z|^2)^{s/2}`` on the physical coordinates of ``grid``."""
    r2 = sum(c ** 2 for c in grid.coords())
    return np.broadcast_to((1.0 + r2) ** (s / 2.0), grid.shape)


def _lp(v: np.ndarray, p: float, axes: tuple, cell: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(v, axis=axes)
    return (np.sum(v ** p, axis=axes) * cell) ** (1.0 / p)


def mixed_norm(F: ds.Distribution, spec: MixedNormSpec) -> float:
    """Weighted ``L^{p,q}`` norm: inner ``p`` over the position axes, outer ``q`` over frequency."""
    v = np.abs(F.values)
    if not np.all(np.isfinite(v)):
        raise AnalysisError("distribution has non-finite values")
    d = F.grid.dim // 2
    if 2 * d != F.grid.dim:
        raise AnalysisError(f"phase-space grid needs an even number of axes, got {F.grid.dim}")
    v = v * weight(F.grid, spec.s)
    cell = F.grid.spacing ** d
    inner = _lp(v, spec.p, tuple(range(d)), cell)
    return float(_lp(inner, spec.q, tuple(range(d)), cell))


def modulation_norm(f: en.Signal, spec: MixedNormSpec,
                    window: Optional[en.Signal] = None) -> float:
    """``||V_g f||_{L^{p,q}_{v_s}}`` with a unit Gaussian window by default."""
    g = en.gaussian(f.grid) if window is None else window
    if not np.any(g.values):
        raise AnalysisError("window must be nonzero")
    return mixed_norm(ds.stft(f, g), spec)


def window_stability(f: en.Signal, spec: MixedNormSpec,
                     widths: Sequence[float] = (0.8, 1.0, 1.25)) -> dict:
    """Modulation norm of ``f`` for several Gaussian windows (reported only)."""
    vals = [modulation_norm(f, spec, en.gaussian(f.grid, width=w)) for w in widths]
    return {"quantity": "window_stability", "widths": list(widths), "values": vals,
            "ratio": max(vals) / min(vals), "asserted": False}


# ----------------------------------------------------------------- frames

@dataclass
class FrameSpec:
    """Window and lattice steps ``a`` (time) and ``b`` (frequency) in index units."""
    window: en.Signal
    a: int
    b: int

    def __post_init__(self):
        N = self.window.grid.N
        if self.window.grid.dim != 1:
            raise AnalysisError("frames are implemented for d = 1")
        for name, v in (("a", self.a), ("b", self.b)):
            if int(v) != v or v <= 0 or N % int(v):
                raise AnalysisError(f"lattice step {name}={v} must be a positive divisor of N={N}")
        self.a, self.b = int(self.a), int(self.b)

    @property
    def density(self) -> float:
        """Atoms per signal dimension."""
        N = self.window.grid.N
        return N / (self.a * self.b)


def gabor_atoms(spec: FrameSpec) -> np.ndarray:
    """Rows ``pi(a k, b l) g[n] = e^{2 pi i b l n / N} g[n - a k]``."""
    g = spec.window.values
    N = g.size
    n = np.arange(N)
    rows = []
    for k in range(0, N, spec.a):
        gk = np.roll(g, k)
        for l in range(0, N, spec.b):
            rows.append(np.exp(2j * np.pi * l * n / N) * gk)
    return np.array(rows)


def frame_operator(spec: FrameSpec) -> np.ndarray:
    """``S = sum <., g_lam> g_lam`` for the cell-weighted inner product."""
    G = gabor_atoms(spec)
    return spec.window.grid.cell * (G.T @ G.conj())


def frame_bounds(spec: FrameSpec) -> tuple[float, float]:
    ev = np.linalg.eigvalsh(frame_operator(spec))
    return float(max(ev[0], 0.0)), float(ev[-1])


def frame_reconstruction_error(spec: FrameSpec, f: en.Signal) -> float:
    """Relative error of ``f = sum <f, g_lam> S^{-1} g_lam``."""
    G = gabor_atoms(spec)
    cell = spec.window.grid.cell
    S = cell * (G.T @ G.conj())
    coef = cell * (G.conj() @ f.values)
    rec = np.linalg.solve(S, G.T @ coef)
    return float(np.linalg.norm(rec - f.values) / np.linalg.norm(f.values))


# ------------------------------------------------------- decomposable data

@dataclass(frozen=True)
class WarpData:
    """Blocks entering the closed form of a decomposable ``W_A``."""
    A23: np.ndarray
    A24: np.ndarray
    M: np.ndarray        # A33 - A34 A24^{-1} A23
    Mw: np.ndarray       # window warp A24^T A23^{-T}
    pref: float          # sqrt|det L| / |det A23|


def warp_data(A) -> WarpData:
    A = np.asarray(A, dtype=float)
    dec, reason = sp.wigner_decompose(A)
    if dec is None:
        raise sp.PreconditionError(f"matrix is not Wigner-decomposable: {reason}")
    if not sp.is_right_regular(dec.L):
        raise sp.PreconditionError("L is not right-regular")
    A23, A24 = sp.block(A, 2, 3), sp.block(A, 2, 4)
    A33, A34 = sp.block(A, 3, 3), sp.block(A, 3, 4)
    M = A33 - A34 @ np.linalg.inv(A24) @ A23
    Mw = A24.T @ np.linalg.inv(A23).T
    pref = np.sqrt(abs(np.linalg.det(dec.L))) / abs(np.linalg.det(A23))
    return WarpData(A23, A24, M, Mw, float(pref))


def warped_window(g: en.Signal, Mw: np.ndarray) -> en.Signal:
    """``g~(t) = g(Mw t)`` by trigonometric interpolation, zero off the box."""
    U = list(Mw @ ds._grid_points(g.grid))
    return g.replace(ds._trig_points(g, U, outside=0.0).reshape(g.grid.shape))


# --------------------------------------------------------- norm relations

def test_family(grid: en.Grid, count: int = 20) -> list[en.Signal]:
    """Deterministic unit-norm family: shifted, modulated, dilated and chirped
    Gaussians and two-atom superpositions."""
    out = []
    for k in range(count):
        c = 0.25 * ((k % 5) - 2) / 2
        w = 0.15 * ((k // 5) - 1.5)
        width = (0.85, 1.0, 1.15)[k % 3]
        f = en.gaussian(grid, center=c, freq=w, width=width)
        if k % 4 == 1:
            chirp = np.exp(1j * np.pi * 0.3 * sum(x ** 2 for x in grid.coords()))
            f = f.replace(f.values * chirp)
        if k % 4 == 3:
            f = f.replace(f.values + 0.5 * en.gaussian(grid, center=-c, freq=-w).values)
        out.append(f.replace(f.values / f.norm()))
    return out


def norm_relation_report(A, f=None, g: Optional[en.Signal] = None, p: float = 2.0,
                         s: float = 0.0, grid: Optional[en.Grid] = None,
                         path: str = "word", tol: float = 1e-4, refine: int = 2) -> dict:
    """Compare ``||W_A(f, g)||_{L^p_{v_s}}`` with ``||f||_{M^p_{v_s}}`` (window ``g``).

    For ``s = 0`` the change of variables in the closed form gives
    ``||W_A(f,g)||_p = pref (|det A23| / |det M|)^{1/p} ||V_{g~} f||_p``, asserted
    to relative tolerance ``tol``.  Both sides are evaluated for the signals
    carried to a grid ``refine`` times larger, since the warped STFT and the tails
    of ``W_A`` leave the original box.  The ratio spread is reported.
    """
    A = np.asarray(A, dtype=float)
    wd = warp_data(A)
    if f is None:
        grid = grid or (g.grid if g is not None else en.Grid(32))
        family = test_family(grid)
    else:
        family = [f] if isinstance(f, en.Signal) else list(f)
        grid = family[0].grid
    g = en.gaussian(grid) if g is None else g
    spec = MixedNormSpec(p, p, s)
    jac = (abs(np.linalg.det(wd.A23)) / abs(np.linalg.det(wd.M))) ** (0 if np.isinf(p) else 1.0 / p)
    ratios, rel = [], []
    gu = ds.upsample(g, refine)
    gt = warped_window(gu, wd.Mw)
    for fk in family:
        fu = ds.upsample(fk, refine)
        lhs = mixed_norm(ds.metaplectic_wigner(A, fu, gu, path=path), spec)
        ratios.append(lhs / modulation_norm(fu, spec, gu))
        if s == 0:
            rhs = wd.pref * jac * mixed_norm(ds.stft(fu, gt), spec)
            rel.append(abs(lhs - rhs) / rhs)
    extra = {"p": p, "s": s, "signals": len(family), "ratio_min": min(ratios),
             "ratio_max": max(ratios), "ratio_spread": max(ratios) - min(ratios),
             "ratios": ratios}
    if rel:
        worst = max(rel)
        return report("norm_relation", worst, tol, tol - worst, True, **extra)
    return report("norm_ratio_spread", extra["ratio_spread"], **extra)


# ------------------------------------------------------------------- Lieb

@dataclass(frozen=True)
class LiebConstants:
    A: np.ndarray
    p: float
    printed_constant: float
    derived_constant: float


def lieb_constants(A, p: float) -> LiebConstants:
    """Derived constant ``|det M|^{1/2-1/p} |det A23|^{1/p-1/2} (2/p)^{d/p}``; the
    printed variant uses ``|det A23|^{-1/2}`` and is kept for comparison."""
    A = np.asarray(A, dtype=float)
    p = _check_exponent(p, "p")
    if p < 1:
        raise AnalysisError(f"Lieb bounds need p >= 1, got {p}")
    wd = warp_data(A)
    d = wd.A23.shape[0]
    dM = abs(np.linalg.det(wd.M))
    d23 = abs(np.linalg.det(wd.A23))
    ip = 0.0 if np.isinf(p) else 1.0 / p
    lp = 1.0 if np.isinf(p) else (2.0 / p) ** (d / p)
    derived = dM ** (0.5 - ip) * d23 ** (ip - 0.5) * lp
    printed = dM ** (0.5 - ip) * d23 ** -0.5 * lp
    return LiebConstants(A, p, float(printed), float(derived))


def lieb_check(A, f: en.Signal, g: en.Signal, p: float, path: str = "word",
               tol: float = 0.01) -> dict:
    """``||W_A(f,g)||_p / (||f|| ||g||)`` against the derived constant: an upper bound
    for ``p >= 2`` and a lower bound for ``p <= 2``, each with relative slack ``tol``."""
    c = lieb_constants(A, p)
    W = ds.metaplectic_wigner(A, f, g, path=path)
    ratio = mixed_norm(W, MixedNormSpec(p, p, 0.0)) / (f.norm() * g.norm())
    if p >= 2:
        bound = c.derived_constant * (1 + tol)
        margin = bound - ratio
        kind = "upper"
    else:
        bound = c.derived_constant * (1 - tol)
        margin = ratio - bound
        kind = "lower"
    return report("lieb", ratio, bound, margin, True, p=p, kind=kind,
                  derived_constant=c.derived_constant, printed_constant=c.printed_constant)


# ------------------------------------------------------------ uncertainty

def superlevel_measure(W: ds.Distribution, energy: float) -> tuple[float, int]:
    """Smallest cell set capturing ``energy`` of ``||W||_2^2`` (greedy on ``|W|^2``)."""
    if energy <= 0:
        return 0.0, 0
    e = np.sort(np.abs(W.values.ravel()) ** 2)[::-1] * W.grid.cell
    cum = np.cumsum(e)
    k = int(np.searchsorted(cum, energy * (1 - 1e-12)) + 1)
    k = min(k, e.size)
    return k * W.grid.cell, k


def weak_uncertainty(A, f: en.Signal, g: en.Signal, eps: float,
                     ps: Sequence[float] = (3.0, 4.0), path: str = "word",
                     norm_tol: float = 1e-6) -> dict:
    """Measure of the smallest set carrying ``1 - eps`` of the energy of ``W_A(f,g)``.

    Asserted floors: ``(1-eps) |det A23| / |det M|`` from the sup bound, and
    ``((1-eps) / C_p^2)^{p/(p-2)}`` from the ``L^p`` bound for each ``p`` in ``ps``.
    The printed floors are reported alongside.
    """
    for name, h in (("f", f), ("g", g)):
        if abs(h.norm() - 1) > norm_tol:
            raise AnalysisError(f"{name} must have unit norm, got {h.norm():.6g}")
    if not 0 <= eps <= 1:
        raise AnalysisError(f"eps must lie in [0, 1], got {eps}")
    wd = warp_data(A)
    d = wd.A23.shape[0]
    d23 = abs(np.linalg.det(wd.A23))
    dM = abs(np.linalg.det(wd.M))
    d24 = abs(np.linalg.det(wd.A24))
    W = ds.metaplectic_wigner(A, f, g, path=path)
    measure, cells = superlevel_measure(W, 1 - eps)
    floors = [report("weak_floor", measure, (1 - eps) * d23 / dM,
                     measure - (1 - eps) * d23 / dM, True)]
    printed = {"printed": 1 - eps, "min_ratio": (1 - eps) * min(1.0, d23 / d24)}
    for p in ps:
        if p <= 2:
            raise AnalysisError(f"improved floor needs p > 2, got {p}")
        c = lieb_constants(A, p)
        fl = ((1 - eps) / c.derived_constant ** 2) ** (p / (p - 2))
        floors.append(report(f"improved_floor_p{p:g}", measure, fl, measure - fl, True, p=p))
        printed[f"improved_p{p:g}"] = ((1 - eps) ** (p / (p - 2)) * d23 ** (p / (p - 2)) / dM
                                     * (p / 2) ** (2 * d / (p - 2)))
    margin = min(r["margin"] for r in floors)
    return report("weak_uncertainty", measure, max(r["bound"] for r in floors), margin, True,
                  eps=eps, cells=cells, floors=floors, printed_floors=printed)


def support_report(A, f: en.Signal, g: en.Signal, threshold: float = 1e-3,
                   path: str = "word") -> dict:
    """Measure of ``{|W_A(f,g)| > threshold * max}``; an illustration, never asserted."""
    W = ds.metaplectic_wigner(A, f, g, path=path)
    a = np.abs(W.values)
    top = a.max()
    cells = 0 if top == 0 else int(np.count_nonzero(a > threshold * top))
    box = W.grid.size * W.grid.cell
    return report("support", cells * W.grid.cell, asserted=False, cells=cells,
                  box_measure=float(box), threshold=threshold)
