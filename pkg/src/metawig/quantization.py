"""Metaplectic pseudodifferential operators on the grid.

``Op_A(a)`` is defined by duality, ``<Op_A(a) f, g> = <a, W_A(g, f)>``.  With an
exactly unitary discrete ``mu(A)`` this gives the kernel ``k = mu(A)^{-1} a`` and
the matrix ``Op[i, j] = Delta^d k[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import itertools

import numpy as np

from . import distributions as ds
from . import engine as en
from . import symplectic as sp


class QuantizationError(ValueError):
    pass


@dataclass
class QuantizedOperator:
    A: np.ndarray
    symbol: ds.Distribution
    matrix: np.ndarray
    grid: en.Grid
    provenance: dict = field(default_factory=dict)

    def apply(self, f: en.Signal) -> en.Signal:
        return f.replace((self.matrix @ f.values.ravel()).reshape(f.grid.shape))

    def duality_defect(self, rng: np.random.Generator, trials: int = 10) -> float:
        """Largest relative deviation in ``<Op f, g> = <a, W_A(g, f)>`` over random pairs."""
        worst = 0.0
        for _ in range(trials):
            f = _random_signal(self.grid, rng)
            g = _random_signal(self.grid, rng)
            lhs = self.apply(f).inner(g)
            W = ds.metaplectic_wigner(self.A, g, f, path="word")
            rhs = self.symbol.inner(W)
            scale = max(np.linalg.norm(self.matrix, 2) * f.norm() * g.norm(), 1e-300)
            worst = max(worst, abs(lhs - rhs) / scale)
        return worst


def _random_signal(grid: en.Grid, rng: np.random.Generator) -> en.Signal:
    v = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    s = en.Signal(grid, v)
    return s.replace(v / s.norm())


def _check_symbol(a: ds.Distribution, grid: en.Grid) -> None:
    if a.grid.N != grid.N or a.grid.dim != 2 * grid.dim:
        raise QuantizationError(
            f"symbol on {a.grid} does not live on the phase space of {grid}")


def _cap_check(grid: en.Grid, cap: Optional[int]) -> None:
    cap = en.oracle_cap() if cap is None else cap
    if grid.size > cap:
        raise en.ResourceError(f"{grid.size} columns exceed the dense-oracle cap {cap}")


def symbol_from_function(fn, grid: en.Grid) -> ds.Distribution:
    """Sample ``fn(x, xi)`` (broadcasting over coordinate arrays) on phase space."""
    pg = grid.with_dim(2 * grid.dim)
    C = pg.coords()
    d = grid.dim
    vals = np.broadcast_to(fn(C[:d], C[d:]), pg.shape)
    return ds.Distribution(pg, np.array(vals, dtype=complex), {"kind": "symbol"})


def constant_symbol(grid: en.Grid, value: complex = 1.0) -> ds.Distribution:
    pg = grid.with_dim(2 * grid.dim)
    return ds.Distribution(pg, np.full(pg.shape, value, dtype=complex), {"kind": "symbol"})


# ---------------------------------------------------------------- kernels

def kernel_of(A, a: ds.Distribution) -> ds.Distribution:
    """``k_A(a) = mu(A)^{-1} a`` with the exact inverse of the discrete ``mu(A)``."""
    A = np.asarray(A, dtype=float)
    n = a.grid.dim
    if A.shape != (2 * n, 2 * n):
        raise sp.DimensionError(f"matrix of size {A.shape[0]} does not act on {n}-axis symbols")
    k = en.apply_values(A, a.values, n, path="word", inverse=True)
    return ds.Distribution(a.grid, k, {"kind": "kernel", "matrix": A.tolist()})


def _kernel_matrix(k: ds.Distribution, grid: en.Grid) -> np.ndarray:
    n = grid.size
    return k.values.reshape(n, n) * grid.cell


def op_general(A, a: ds.Distribution, grid: en.Grid, assembly: str = "kernel",
               cap: Optional[int] = None) -> QuantizedOperator:
    """``Op_A(a)`` as a dense ``N^d x N^d`` matrix.

    ``assembly='kernel'`` reshapes ``mu(A)^{-1} a``; ``assembly='duality'`` builds
    each entry as ``<a, W_A(e_i, e_j)>`` from the dense matrix of ``mu(A)``.
    """
    _check_symbol(a, grid)
    _cap_check(grid, cap)
    A = np.asarray(A, dtype=float)
    if assembly == "kernel":
        M = _kernel_matrix(kernel_of(A, a), grid)
    elif assembly == "duality":
        pg = a.grid
        U = en.dense_matrix_of(A, pg, cap=max(pg.size, en.oracle_cap()), path="word").matrix
        # <a, U(e_i (x) e_j)> Delta^{2d} / Delta^d
        M = (U.conj().T @ a.values.ravel()).reshape(grid.size, grid.size) * grid.cell
    else:
        raise QuantizationError(f"unknown assembly {assembly!r}")
    return QuantizedOperator(A, a, M, grid, {"assembly": assembly})


def op_weyl(a: ds.Distribution, grid: en.Grid) -> QuantizedOperator:
    """Weyl quantization by direct double quadrature.

    ``Op f(x) = sum_{y, xi} e^{2 pi i (x-y).xi} a((x+y)/2, xi) f(y) Delta^{2d}``; the
    symbol is evaluated at half-grid midpoints by trigonometric interpolation in
    the position variables, with ``x - y`` taken as its minimal periodic image.
    """
    _check_symbol(a, grid)
    half = _half_grid(grid)
    mid = _interp_axes(a.values, list(range(grid.dim)), half)
    return QuantizedOperator(sp.A_tau(0.5, grid.dim), a, _weyl_assemble(mid, grid), grid,
                             {"assembly": "weyl_quadrature"})


def _half_grid(grid: en.Grid) -> np.ndarray:
    # x - t/2 with t = x - y reduced to the minimal periodic image sits at index
    # 2i - t_idx + N of this array
    return (np.arange(4 * grid.N) - 2 * grid.N) * grid.spacing / 2


def _weyl_assemble(mid: np.ndarray, grid: en.Grid) -> np.ndarray:
    """Weyl matrix from symbol values ``mid`` on half-grid positions x frequency grid."""
    d = grid.dim
    N = grid.N
    pts = ds._grid_points(grid)
    n = N ** d
    idx = np.indices((N,) * d).reshape(d, -1)
    M = np.empty((n, n), dtype=complex)
    for r in range(n):
        t_idx = (idx[:, r:r + 1] - idx + N // 2) % N - N // 2    # (d, n)
        tie = t_idx == -(N // 2)
        # at |t| = N/2 both images are equally close; averaging them keeps
        # real symbols self-adjoint
        sym = 0.0
        for flips in itertools.product((False, True), repeat=d):
            t = np.where(np.array(flips)[:, None] & tie, -t_idx, t_idx)
            w = np.prod(np.where(tie, 0.5, np.where(np.array(flips)[:, None], 0.0, 1.0)),
                        axis=0)
            mids = tuple(2 * idx[k, r] - t[k] + N for k in range(d))
            sym = sym + w[:, None] * mid[mids].reshape(n, n)    # (y, xi)
        # the wrapped difference changes x - y by multiples of the period,
        # which leaves the grid phase unchanged
        phase = np.exp(2j * np.pi * (pts[:, r:r + 1] - pts).T @ pts)
        M[r] = np.sum(phase * sym, axis=1) * grid.cell ** 2
    return M


def _interp_axes(values: np.ndarray, axes: list, points: np.ndarray) -> np.ndarray:
    """Periodic trigonometric interpolation along ``axes`` at ``points``."""
    out = np.asarray(values, dtype=complex)
    N = out.shape[0]
    period = np.sqrt(N)
    k = np.fft.fftfreq(N, d=1.0 / N)
    E = np.exp(2j * np.pi * np.multiply.outer(points, k) / period)
    E[:, N // 2] = np.cos(np.pi * N * points / period)
    for ax in axes:
        c = np.fft.fft(np.fft.ifftshift(out, axes=ax), axis=ax) / N
        out = np.moveaxis(np.tensordot(E, c, axes=([1], [ax])), 0, ax)
    return out


# ------------------------------------------------------ change of quantization

def change_quantization(A, B, a: ds.Distribution) -> ds.Distribution:
    """``b = mu(B) mu(A)^{-1} a``, so that ``Op_B(b) = Op_A(a)`` up to phase."""
    B = np.asarray(B, dtype=float)
    k = kernel_of(A, a)
    b = en.apply_values(B, k.values, a.grid.dim, path="word")
    return ds.Distribution(a.grid, b, {"kind": "symbol", "from": np.asarray(A).tolist(),
                                       "to": B.tolist()})


def assembly_defect(A, a: ds.Distribution, grid: en.Grid) -> float:
    """Max entry deviation between kernel and duality assemblies."""
    K = op_general(A, a, grid, "kernel").matrix
    D = op_general(A, a, grid, "duality").matrix
    return float(np.max(np.abs(K - D)))


# ---------------------------------------------------------------- intertwining

def _trig_eval2(values: np.ndarray, x: np.ndarray, y: np.ndarray,
                chunk: int = 32768) -> np.ndarray:
    """Trigonometric interpolant of a 2-axis grid array at ``(x, y)``, zero off the box."""
    N = values.shape[0]
    period = np.sqrt(N)
    k = np.fft.fftfreq(N, d=1.0 / N)
    c = np.fft.fft2(np.fft.ifftshift(values)) / N ** 2
    x = np.ravel(x)
    y = np.ravel(y)
    out = np.zeros(x.size, dtype=complex)
    inside = (x >= -period / 2) & (x < period / 2) & (y >= -period / 2) & (y < period / 2)
    pos = np.flatnonzero(inside)
    for s in range(0, pos.size, chunk):
        sel = pos[s:s + chunk]
        Ex = np.exp(2j * np.pi * np.outer(x[sel], k) / period)
        Ex[:, N // 2] = np.cos(np.pi * N * x[sel] / period)
        Ey = np.exp(2j * np.pi * np.outer(y[sel], k) / period)
        Ey[:, N // 2] = np.cos(np.pi * N * y[sel] / period)
        out[sel] = np.sum((Ex @ c) * Ey, axis=1)
    return out


def _outer_weyl_apply(A, a: ds.Distribution, W: ds.Distribution,
                      out_grid: en.Grid) -> np.ndarray:
    """``Op_w(sigma) W`` on ``out_grid`` for ``sigma(m, z) = a(L1 m + L2 z)``, ``L2`` invertible.

    The frequency integral is done in closed form,
    ``K(m, t) = |det L2|^{-1} e^{-2 pi i s.L1 m} a^(-s)`` with ``s = L2^{-T} t``, and
    the position integral by a Riemann sum over the grid of ``W``.
    """
    P = sp.symplectic_inverse(A)[[0, 2]]
    L1, L2 = P[:, :2], P[:, 2:]
    L2i = np.linalg.inv(L2)
    jac = 1.0 / abs(np.linalg.det(L2))
    ahat = en.dft_values(a.values, 2)
    src_pts = ds._grid_points(W.grid)
    Wv = W.values.ravel()
    keep = np.abs(Wv) > 0
    src_pts, Wv = src_pts[:, keep], Wv[keep]
    out_pts = ds._grid_points(out_grid)
    out = np.empty(out_pts.shape[1], dtype=complex)
    for r in range(out_pts.shape[1]):
        w = out_pts[:, r:r + 1]
        m = (w + src_pts) / 2
        sv = L2i.T @ (w - src_pts)
        K = np.exp(-2j * np.pi * np.sum(sv * (L1 @ m), axis=0)) * _trig_eval2(ahat, -sv[0], -sv[1])
        out[r] = jac * np.sum(K * Wv) * W.grid.cell
    return out.reshape(out_grid.shape)


def intertwining_check(A, a: ds.Distribution, f: en.Signal, g: en.Signal,
                       cap: Optional[int] = None, path: str = "auto",
                       refine: int = 2) -> dict:
    """``W_A(Op_w(a) f, g)`` against ``Op_w((a (x) 1) o A^{-1}) W_A(f, g)``.

    The outer Weyl operator acts on phase space with symbol
    ``sigma(Z) = a(P A^{-1} Z)``, ``P`` picking the first position and first
    frequency coordinates.  When the frequency block of ``P A^{-1}`` is invertible
    the outer operator is applied by closed-form frequency integration and a
    position quadrature against ``W_A(f, g)`` recomputed on a grid ``refine``
    times larger and finer; otherwise it is assembled on the grid.
    """
    d = f.grid.dim
    if d != 1:
        raise QuantizationError("intertwining check is implemented for d = 1")
    A = np.asarray(A, dtype=float)
    pg = f.grid.with_dim(2)
    _cap_check(pg, cap)
    lhs = ds.metaplectic_wigner(A, op_weyl(a, f.grid).apply(f), g, path=path).values
    Wf = ds.metaplectic_wigner(A, f, g, path=path)
    P = sp.symplectic_inverse(A)[[0, 2]]
    if abs(np.linalg.det(P[:, 2:])) > 1e-12:
        Wfine = ds.metaplectic_wigner(A, ds.upsample(f, refine), ds.upsample(g, refine),
                                       path=path)
        rhs = _outer_weyl_apply(A, a, Wfine, pg)
        method = "closed_form"
    else:
        # sigma is then constant along some frequency direction: the grid sum
        # over one box is the matching discrete integral
        half = _half_grid(pg)
        zeta = f.grid.points
        W1, W2, Z1, Z2 = np.meshgrid(half, half, zeta, zeta, indexing="ij")
        src = P @ np.stack([W1.ravel(), W2.ravel(), Z1.ravel(), Z2.ravel()])
        mid = _trig_eval2(a.values, src[0], src[1]).reshape(W1.shape)
        rhs = (_weyl_assemble(mid, pg) @ Wf.values.ravel()).reshape(pg.shape)
        method = "grid"
    err, c = en.align_phase(lhs, rhs)
    return {"quantity": "intertwining", "value": err, "phase": [c.real, c.imag],
            "scale": float(np.max(np.abs(lhs))), "method": method}
