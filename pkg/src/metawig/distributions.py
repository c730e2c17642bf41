"""Time-frequency distributions on the phase-space grid.

A signal on an ``N``-point, ``d``-axis grid yields distributions on the
``2d``-axis grid with the same ``N``; the first ``d`` axes are position and the
last ``d`` are frequency.  ``W_A(f, g) = mu(A)(f (x) conj g)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine as en
from . import symplectic as sp


class DistributionError(ValueError):
    pass


WINDOW_OUTSIDE = 0.0
PATHS = ("auto", "dense", "word", "fast")


@dataclass
class Distribution:
    grid: en.Grid
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise DistributionError(
                f"values of shape {self.values.shape} do not fit grid {self.grid.shape}")

    @property
    def d(self) -> int:
        return self.grid.dim // 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.values) * np.sqrt(self.grid.cell))

    def inner(self, other: "Distribution") -> complex:
        return complex(np.vdot(other.values, self.values) * self.grid.cell)

    def as_signal(self) -> en.Signal:
        return en.Signal(self.grid, self.values)


def _check_pair(f: en.Signal, g: en.Signal) -> en.Grid:
    if f.grid != g.grid:
        raise DistributionError(f"grid mismatch: {f.grid} vs {g.grid}")
    return f.grid.with_dim(2 * f.grid.dim)


def tensor(f: en.Signal, g: en.Signal) -> np.ndarray:
    """Samples of ``f(x) conj(g(y))`` on the ``2d``-axis grid."""
    _check_pair(f, g)
    return np.multiply.outer(f.values, np.conj(g.values))


# ----------------------------------------------------- trigonometric sampling

def trig_interp(values: np.ndarray, points: list) -> np.ndarray:
    """Periodic band-limited interpolant of grid samples on a product set.

    ``points[i]`` holds the evaluation coordinates for axis ``i``; the result has
    shape ``(len(points[0]), ..., len(points[-1]))``.  The Nyquist mode is split
    symmetrically, so real samples interpolate to real values.
    """
    values = np.asarray(values, dtype=complex)
    m = values.ndim
    N = values.shape[0]
    period = np.sqrt(N)
    coef = np.fft.fftn(np.fft.ifftshift(values)) / N ** m
    k = np.fft.fftfreq(N, d=1.0 / N)
    out = coef
    for i in range(m):
        u = np.asarray(points[i], dtype=float).ravel()
        E = np.exp(2j * np.pi * np.multiply.outer(u, k) / period)
        E[:, N // 2] = np.cos(np.pi * N * u / period)
        # contract axis i of ``out`` (always at position i after moveaxis)
        out = np.moveaxis(np.tensordot(E, out, axes=([1], [i])), 0, i)
    return out


def _grid_points(grid: en.Grid) -> np.ndarray:
    """All grid points as a ``(dim, N^dim)`` array in lexicographic order."""
    mesh = np.meshgrid(*([grid.points] * grid.dim), indexing="ij")
    return np.stack([c.ravel() for c in mesh])


def _fine_nodes(N: int, K: int, d: int) -> np.ndarray:
    """Nodes of the ``K``-times refined grid over the same box."""
    x = (np.arange(N * K) - N * K // 2) / (K * np.sqrt(N))
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    return np.stack([c.ravel() for c in mesh])


def _trig_points(f: en.Signal, U: list, outside=None) -> np.ndarray:
    """Evaluate ``f`` at the points ``(U[0][k], ..., U[d-1][k])`` for arrays ``U[i]``.

    With ``outside`` set, points beyond the box ``[-sqrt(N)/2, sqrt(N)/2)`` take
    that value instead of a periodic copy.
    """
    d = f.grid.dim
    shape = np.shape(U[0])
    if outside is not None:
        half = 0.5 * np.sqrt(f.grid.N)
        inside = np.ones(shape, dtype=bool)
        for u in U:
            inside &= (np.asarray(u) >= -half) & (np.asarray(u) < half)
        out = np.full(shape, outside, dtype=complex)
        if inside.any():
            out[inside] = _trig_points(f, [np.asarray(u)[inside] for u in U])
        return out
    if d == 1:
        return trig_interp(f.values, [np.ravel(U[0])]).reshape(shape)
    # product evaluation then diagonal extraction, in chunks to bound memory
    n = U[0].size
    out = np.empty(n, dtype=complex)
    flat = [u.ravel() for u in U]
    chunk = 256
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        vals = trig_interp(f.values, [p[s:e] for p in flat])
        idx = np.arange(e - s)
        out[s:e] = vals[(idx,) * d]
    return out.reshape(shape)


def upsample(f: en.Signal, factor: int) -> en.Signal:
    """``f`` on the grid with ``factor`` times the box and ``1/factor`` the spacing,
    by trigonometric interpolation inside the original box and zero outside."""
    fine = en.Grid(f.grid.N * factor ** 2, f.grid.dim)
    U = list(_grid_points(fine))
    return en.Signal(fine, _trig_points(f, U, outside=0.0).reshape(fine.shape))


# ------------------------------------------------------------------- STFT

def stft(f: en.Signal, g: en.Signal) -> Distribution:
    """``V_g f(x, xi) = int f(t) conj(g(t - x)) e^{-2 pi i xi.t} dt``.

    Window translates are exact index rolls, and the transform in ``t`` is the
    unitary centered DFT (the grid weights cancel because ``Delta^2 N = 1``).
    """
    pgrid = _check_pair(f, g)
    d = f.grid.dim
    N = f.grid.N
    offs = np.indices((N,) * d).reshape(d, -1).T - N // 2
    rows = np.empty((N ** d,) + f.grid.shape, dtype=complex)
    gc = np.conj(g.values)
    for k, off in enumerate(offs):
        rows[k] = f.values * np.roll(gc, tuple(off), axis=tuple(range(d)))
    rows = rows.reshape((N,) * d + f.grid.shape)
    vals = en.dft_values(rows, d)
    return Distribution(pgrid, vals, {"kind": "stft", "path": "direct"})


# ---------------------------------------------------------- tau-Wigner family

def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise DistributionError(f"tau must lie in [0, 1], got {tau}")
    return tau


def tau_wigner(tau: float, f: en.Signal, g: en.Signal) -> Distribution:
    """``W_tau(f,g)(x,xi) = int f(x + tau t) conj(g(x - (1-tau) t)) e^{-2 pi i xi.t} dt``.

    ``tau`` in ``{0, 1}`` uses the product formulas with ``f-hat`` and ``g-hat``;
    otherwise the integrand is sampled by periodic trigonometric interpolation and
    summed on the grid.
    """
    tau = _check_tau(tau)
    pgrid = _check_pair(f, g)
    d = f.grid.dim
    N = f.grid.N
    prov = {"kind": "tau_wigner", "tau": tau, "path": "direct"}
    xi_dot_x = _cross_phase(f.grid)
    if tau == 0.0:
        gh = en.dft_values(g.values, d)
        vals = np.multiply.outer(f.values, np.conj(gh)) * np.exp(-2j * np.pi * xi_dot_x)
        return Distribution(pgrid, vals, prov)
    if tau == 1.0:
        fh = en.dft_values(f.values, d)
        vals = np.multiply.outer(np.conj(g.values), fh) * np.exp(2j * np.pi * xi_dot_x)
        return Distribution(pgrid, vals, prov)
    x = f.grid.points
    P, T = np.meshgrid(x, x, indexing="ij")
    if d == 1:
        a = trig_interp(f.values, [(P + tau * T).ravel()]).reshape(N, N)
        b = trig_interp(g.values, [(P - (1 - tau) * T).ravel()]).reshape(N, N)
    else:
        # separable: evaluate on per-axis (x_i, t_i) pairs, then reorder axes
        a = trig_interp(f.values, [(P + tau * T).ravel()] * d)
        b = trig_interp(g.values, [(P - (1 - tau) * T).ravel()] * d)
        shape = (N, N) * d
        order = [2 * i for i in range(d)] + [2 * i + 1 for i in range(d)]
        a = a.reshape(shape).transpose(order)
        b = b.reshape(shape).transpose(order)
    vals = en.dft_values(a * np.conj(b), 2 * d, axes=range(d, 2 * d))
    return Distribution(pgrid, vals, prov)


def _cross_phase(grid: en.Grid) -> np.ndarray:
    """``x . xi`` on the ``2d``-axis grid."""
    d = grid.dim
    P = grid.with_dim(2 * d).coords()
    out = 0.0
    for i in range(d):
        out = out + P[i] * P[d + i]
    return np.broadcast_to(out, (grid.N,) * (2 * d))


def wigner(f: en.Signal, g: Optional[en.Signal] = None) -> Distribution:
    return tau_wigner(0.5, f, f if g is None else g)


def rihaczek(f: en.Signal, g: Optional[en.Signal] = None) -> Distribution:
    return tau_wigner(0.0, f, f if g is None else g)


# --------------------------------------------------------- metaplectic path

def fast_available(A) -> bool:
    dec, _ = _decomposition(A)
    return dec is not None and sp.is_right_regular(dec.L)


def _decomposition(A):
    try:
        return sp.wigner_decompose(A)
    except sp.SymplecticError as exc:
        return None, str(exc)


def metaplectic_wigner(A, f: en.Signal, g: en.Signal, path: str = "auto",
                       cap: Optional[int] = None) -> Distribution:
    """``W_A(f, g) = mu(A)(f (x) conj g)`` by the selected path.

    ``auto`` takes the fast path when it applies.  That path is accurate for
    signals resolved on the grid but is not an exact isometry; ``word`` is.
    """
    if path not in PATHS:
        raise DistributionError(f"unknown path {path!r}; expected one of {PATHS}")
    pgrid = _check_pair(f, g)
    A = np.asarray(A, dtype=float)
    d = f.grid.dim
    if A.shape != (4 * d, 4 * d):
        raise sp.DimensionError(
            f"matrix of size {A.shape[0]} does not act on a {d}-dimensional tensor")
    if path == "auto":
        path = "fast" if fast_available(A) else "word"
    if path == "fast":
        return fast_decomposable(A, f, g)
    F = tensor(f, g)
    if path == "word":
        vals = en.apply_values(A, F, 2 * d, path="word")
    else:
        op = en.dense_matrix_of(A, pgrid, cap=cap, path="word")
        vals = (op.matrix @ F.ravel()).reshape(pgrid.shape)
    return Distribution(pgrid, vals, {"kind": "metaplectic", "path": path,
                                      "matrix": A.tolist()})


def fast_decomposable(A, f: en.Signal, g: en.Signal) -> Distribution:
    """Closed form for ``A = V_C A_FT2 D_L`` with right-regular ``L``.

    ``W_A(f,g)(x,xi) = sqrt|det L| |det A23|^{-1} Phi_C(x,xi)
    e^{2 pi i A23^{-1} xi . A33^T x} V_{g~} f(c(x), d(xi))`` with
    ``g~(t) = g(A24^T A23^{-T} t)``, ``c(x) = (A33 - A34 A24^{-1} A23)^T x`` and
    ``d(xi) = A23^{-1} xi``.  The STFT is evaluated directly at the warped
    points: the window by trigonometric interpolation, the frequency sum as a
    non-uniform DFT.
    """
    pgrid = _check_pair(f, g)
    A = np.asarray(A, dtype=float)
    d = f.grid.dim
    dec, reason = _decomposition(A)
    if dec is None:
        raise sp.PreconditionError(f"fast path unavailable: {reason}; use path='word' or 'dense'")
    if not sp.is_right_regular(dec.L):
        raise sp.PreconditionError("fast path unavailable: L is not right-regular; "
                                   "use path='word' or 'dense'")
    A23, A24 = sp.block(A, 2, 3), sp.block(A, 2, 4)
    A33, A34 = sp.block(A, 3, 3), sp.block(A, 3, 4)
    A23i = np.linalg.inv(A23)
    Mw = A24.T @ A23i.T
    Cx = (A33 - A34 @ np.linalg.inv(A24) @ A23).T
    pref = np.sqrt(abs(np.linalg.det(dec.L))) / abs(np.linalg.det(A23))

    N = f.grid.N
    pts = _grid_points(f.grid)
    Xw = Cx @ pts            # warped positions, one per x sample
    Xi = A23i @ pts          # warped frequencies, one per xi sample
    # integrand band: f up to Nyquist, the window stretched by Mw; the warped
    # frequencies may exceed the grid band, so integrate on a refined grid
    nyq = 0.5 * np.sqrt(N)
    need = max(1.0 + np.linalg.norm(Mw, 2), np.max(np.abs(Xi)) / nyq + 1.0)
    K = int(2 ** np.ceil(np.log2(need)))
    T = _fine_nodes(N, K, d)
    w_t = (f.grid.spacing / K) ** d
    kern = np.exp(-2j * np.pi * Xi.T @ T) * w_t               # (n_xi, n_t)
    fv = _trig_points(f, [T[i] for i in range(d)], outside=0.0)
    V = np.empty((N ** d, N ** d), dtype=complex)
    for k in range(N ** d):
        S = Mw @ (T - Xw[:, k:k + 1])
        win = _trig_points(g, [S[i] for i in range(d)], outside=WINDOW_OUTSIDE)
        V[k] = kern @ (fv * np.conj(win))
    phase = np.exp(2j * np.pi * np.einsum("ik,ij,jl->kl", Xi, A33.T, pts).T)
    # phase[k, l]: position k, frequency l
    vals = pref * V * phase
    vals = vals.reshape((N,) * (2 * d))
    vals = vals * en.chirp_values(dec.C, N, 2 * d)
    return Distribution(pgrid, vals, {"kind": "metaplectic", "path": "fast",
                                      "matrix": A.tolist()})


# --------------------------------------------------------------- Cohen class

def cohen_kernel(A, grid: en.Grid) -> Distribution:
    """``Sigma_A = F^{-1} Phi_{-B_A}`` sampled so that circular convolution with
    grid weights reproduces ``W_A`` from the classical Wigner distribution."""
    B = sp.cohen_matrix(A)
    pgrid = grid if grid.dim == B.shape[0] else grid.with_dim(B.shape[0])
    n = pgrid.dim
    vals = en.dft_values(en.chirp_values(-B, pgrid.N, n), n, inverse=True)
    return Distribution(pgrid, vals, {"kind": "cohen_kernel", "B_A": B.tolist()})


def cohen_apply(W: Distribution, kernel: Distribution) -> Distribution:
    """Circular convolution ``(W * Sigma)(z) = sum_w W(w) Sigma(z - w) Delta^{2d}``."""
    n = W.grid.dim
    spec = en.dft_values(W.values, n) * en.dft_values(kernel.values, n)
    return Distribution(W.grid, en.dft_values(spec, n, inverse=True),
                        {"kind": "cohen", "kernel": kernel.provenance})


# ---------------------------------------------------------- identities

def fundamental_identity_check(A, f: en.Signal, g: en.Signal, path: str = "word") -> dict:
    """Compare ``W_A(f-hat, g-hat)`` with ``W_A'(f, g)``, ``A' = A D_S J``."""
    A = np.asarray(A, dtype=float)
    Ap = sp.fundamental_identity_matrix(A)
    lhs = metaplectic_wigner(A, en.dft_centered(f), en.dft_centered(g), path=path)
    rhs = metaplectic_wigner(Ap, f, g, path=path)
    err, c = en.align_phase(lhs.values, rhs.values)
    return {"quantity": "fundamental_identity", "value": err,
            "phase": [c.real, c.imag], "matrix_prime": Ap.tolist()}


def tf_shift(f: en.Signal, w) -> en.Signal:
    """``pi(w) f = M_xi T_x f`` for a grid-aligned ``w = (x, xi)`` in index offsets."""
    d = f.grid.dim
    w = np.asarray(w, dtype=int).ravel()
    if w.size != 2 * d:
        raise DistributionError(f"phase-space point needs {2 * d} integer offsets")
    v = np.roll(f.values, tuple(w[:d]), axis=tuple(range(d)))
    phase = 0.0
    for i, x in enumerate(f.grid.coords()):
        phase = phase + w[d + i] * f.grid.spacing * x
    return f.replace(v * np.exp(2j * np.pi * phase))


def shift_invertibility_trial(A, f: en.Signal, g: en.Signal, w, path: str = "word") -> dict:
    """``|W_A(pi(w) f, g)|`` against ``|W_A(f, g)|`` translated by ``E_A w``.

    ``w`` is given in integer index offsets and ``E_A w`` must land on the grid.
    """
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=int).ravel()
    k = sp.shift_matrix(A) @ w
    if np.max(np.abs(k - np.round(k))) > 1e-9:
        raise DistributionError(f"E_A w = {k.tolist()} is not grid-aligned")
    k = np.round(k).astype(int)
    W0 = np.abs(metaplectic_wigner(A, f, g, path=path).values)
    W1 = np.abs(metaplectic_wigner(A, tf_shift(f, w), g, path=path).values)
    moved = np.roll(W0, tuple(k), axis=tuple(range(W0.ndim)))
    err = float(np.max(np.abs(W1 - moved)) / max(W0.max(), 1e-300))
    return {"quantity": "shift_invertibility", "value": err, "shift": k.tolist()}


def stft_recovery(f: en.Signal, g1: en.Signal, g2: en.Signal, g3: en.Signal, w,
                  A=None, path: str = "word", threshold: float = 1e-8) -> dict:
    """``<W_A(f,g1), W_A(pi(w) g3, g2)> / <g2, g1>`` against ``V_{g3} f(w)``.

    ``w`` is a grid-aligned phase-space point given as integer index offsets from
    the origin.
    """
    d = f.grid.dim
    A = sp.A_tau(0.5, d) if A is None else np.asarray(A, dtype=float)
    den = g2.inner(g1)
    if abs(den) < threshold * max(g1.norm() * g2.norm(), 1e-300):
        raise sp.PreconditionError(f"<g2, g1> = {den:.3e} is too close to zero")
    W1 = metaplectic_wigner(A, f, g1, path=path)
    W2 = metaplectic_wigner(A, tf_shift(g3, w), g2, path=path)
    value = W1.inner(W2) / den
    V = stft(f, g3)
    idx = tuple(np.asarray(w, dtype=int).ravel() + f.grid.N // 2)
    ref = complex(V.values[idx])
    return {"quantity": "stft_recovery", "value": [value.real, value.imag],
            "reference": [ref.real, ref.imag], "error": abs(value - ref)}


def moyal_defect(A, f1, g1, f2, g2, path: str = "word") -> float:
    """Relative deviation in ``<W_A(f1,g1), W_A(f2,g2)> = <f1,f2> conj<g1,g2>``."""
    lhs = metaplectic_wigner(A, f1, g1, path).inner(metaplectic_wigner(A, f2, g2, path))
    rhs = f1.inner(f2) * np.conj(g1.inner(g2))
    scale = f1.norm() * f2.norm() * g1.norm() * g2.norm()
    return float(abs(lhs - rhs) / scale)
