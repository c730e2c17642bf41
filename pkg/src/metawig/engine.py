"""Metaplectic operators on centered self-dual grids.

A grid with ``N`` samples per axis has spacing ``1/sqrt(N)`` and points
``x_j = (j - N/2) / sqrt(N)``.  With that spacing the unitary centered DFT maps
the grid onto itself, so ``mu(J)`` is an exact unitary on ``C^(N^m)``.

Every elementary action here is exactly unitary on the grid:

* the centered DFT (full or on an axis subset),
* multiplication by a chirp ``exp(i pi x.Cx)``,
* chirp convolution ``F^{-1} Phi_{-C} F``,
* dilation ``|det L|^{1/2} f(L.)``, realized either as an index permutation
  (integer unimodular ``L``) or as a product of trigonometric shears.

Arrays carry the grid axes last; any leading axes are treated as a batch.
"""
from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from . import symplectic as sp

DEFAULT_CAP = 4096


def oracle_cap() -> int:
    return int(os.environ.get("METAWIG_CAP", DEFAULT_CAP))


class EngineError(ValueError):
    pass


class ModeError(EngineError):
    pass


class ResourceError(EngineError):
    pass


@dataclass(frozen=True)
class Grid:
    N: int
    dim: int = 1

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise EngineError(f"N must be a positive even integer, got {self.N}")
        if self.dim <= 0:
            raise EngineError(f"dim must be positive, got {self.dim}")

    @property
    def spacing(self) -> float:
        return 1.0 / np.sqrt(self.N)

    @property
    def points(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.spacing

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def size(self) -> int:
        return self.N ** self.dim

    @property
    def cell(self) -> float:
        """Volume of one grid cell."""
        return self.spacing ** self.dim

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        out = []
        for i in range(self.dim):
            shape = [1] * self.dim
            shape[i] = self.N
            out.append(self.points.reshape(shape))
        return out

    def with_dim(self, dim: int) -> "Grid":
        return Grid(self.N, dim)

    def to_dict(self) -> dict:
        return {"N": self.N, "dim": self.dim}


@dataclass
class Signal:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise EngineError(
                f"values of shape {self.values.shape} do not fit grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise EngineError("signal values must be finite")

    def norm(self) -> float:
        """Discrete L2 norm, ``||values||_2 * spacing^(m/2)``."""
        return float(np.linalg.norm(self.values) * np.sqrt(self.grid.cell))

    def inner(self, other: "Signal") -> complex:
        """``<self, other>`` (linear in the first slot)."""
        return complex(np.vdot(other.values, self.values) * self.grid.cell)

    def conj(self) -> "Signal":
        return Signal(self.grid, np.conj(self.values))

    def replace(self, values) -> "Signal":
        return Signal(self.grid, values)


# ------------------------------------------------------------------ helpers

def _grid_axes(m: int, which: Optional[Sequence[int]] = None) -> tuple:
    idx = range(m) if which is None else which
    return tuple(i - m for i in idx)


def _coord(N: int, m: int, i: int) -> np.ndarray:
    shape = [1] * m
    shape[i] = N
    return ((np.arange(N) - N // 2) / np.sqrt(N)).reshape(shape)


def gaussian(grid: Grid, center=None, freq=None, width: float = 1.0) -> Signal:
    """Unit-norm Gaussian ``(2/w^2)^{d/4} exp(-pi |x-c|^2/w^2) e^{2 pi i freq.x}``."""
    d = grid.dim
    c = np.zeros(d) if center is None else np.broadcast_to(np.asarray(center, float), (d,))
    w = np.zeros(d) if freq is None else np.broadcast_to(np.asarray(freq, float), (d,))
    vals = np.ones(grid.shape, dtype=complex)
    for i, x in enumerate(grid.coords()):
        vals = vals * np.exp(-np.pi * (x - c[i]) ** 2 / width ** 2 + 2j * np.pi * w[i] * x)
    vals *= (2.0 / width ** 2) ** (d / 4)
    return Signal(grid, vals)


def impulse(grid: Grid, index=None) -> Signal:
    vals = np.zeros(grid.shape, dtype=complex)
    if index is None:
        index = (grid.N // 2,) * grid.dim
    vals[tuple(index)] = 1.0
    return Signal(grid, vals)


def align_phase(a, b) -> tuple[float, complex]:
    """Max deviation between ``a`` and ``c*b`` for the best unimodular ``c``.

    ``c`` is the phase of ``<a, b>``; returns ``(max |a - c b|, c)``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    z = np.vdot(b, a)
    c = z / abs(z) if abs(z) > 0 else 1.0
    return float(np.max(np.abs(a - c * b))) if a.size else 0.0, c


def canonical_phase(values) -> np.ndarray:
    """Rotate so the largest-magnitude sample is real and non-negative (display only)."""
    values = np.asarray(values)
    k = np.argmax(np.abs(values))
    v = values.flat[k]
    return values if v == 0 else values * (abs(v) / v)


# --------------------------------------------------------- elementary actions

def dft_values(values: np.ndarray, m: int, axes: Optional[Sequence[int]] = None,
               inverse: bool = False) -> np.ndarray:
    ax = _grid_axes(m, axes)
    x = np.fft.ifftshift(values, axes=ax)
    x = (np.fft.ifftn if inverse else np.fft.fftn)(x, axes=ax, norm="ortho")
    return np.fft.fftshift(x, axes=ax)


def dft_centered(f: Signal, inverse: bool = False) -> Signal:
    """Unitary centered DFT on all axes of ``f``'s grid."""
    return f.replace(dft_values(f.values, f.grid.dim, inverse=inverse))


def chirp_values(C, N: int, m: int) -> np.ndarray:
    """``Phi_C(x) = exp(i pi x.Cx)`` sampled on the grid."""
    C = sp._symmetric(C)
    if C.shape != (m, m):
        raise EngineError(f"chirp matrix must be {m}x{m}, got {C.shape}")
    q = 0.0
    for i in range(m):
        xi = _coord(N, m, i)
        for j in range(m):
            if C[i, j] != 0:
                q = q + C[i, j] * xi * _coord(N, m, j)
    return np.exp(1j * np.pi * np.broadcast_to(q, (N,) * m))


def chirp_mul_values(C, values: np.ndarray, m: int) -> np.ndarray:
    N = values.shape[-1]
    return values * chirp_values(C, N, m)


def chirp_conv_values(C, values: np.ndarray, m: int) -> np.ndarray:
    """``mu(V_C^T) = F^{-1} Phi_{-C} F``."""
    C = sp._symmetric(C)
    return dft_values(chirp_mul_values(-C, dft_values(values, m), m), m, inverse=True)


def chirp(C, grid: Grid) -> Signal:
    return Signal(grid, chirp_values(C, grid.N, grid.dim))


def apply_chirp_mul(C, f: Signal) -> Signal:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return f.replace(chirp_mul_values(C, f.values, f.grid.dim))


def apply_chirp_conv(C, f: Signal) -> Signal:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return f.replace(chirp_conv_values(C, f.values, f.grid.dim))


def _axis_chirp(values, i: int, m: int, c: float) -> np.ndarray:
    N = values.shape[-1]
    return values * np.exp(1j * np.pi * c * _coord(N, m, i) ** 2)


def _axis_chirp_conv(values, i: int, m: int, c: float) -> np.ndarray:
    v = dft_values(values, m, axes=[i])
    v = _axis_chirp(v, i, m, -c)
    return dft_values(v, m, axes=[i], inverse=True)


def _shear_values(values, i: int, j: int, amount: float, m: int) -> np.ndarray:
    """``g(x) = f(x + amount * x_j e_i)``: trigonometric shift along axis ``i``."""
    N = values.shape[-1]
    v = dft_values(values, m, axes=[i])
    phase = np.exp(2j * np.pi * amount * _coord(N, m, i) * _coord(N, m, j))
    return dft_values(v * phase, m, axes=[i], inverse=True)


def _scale_values(values, i: int, m: int, a: float, inverse: bool = False) -> np.ndarray:
    """``g(x) = sqrt(|a|) f(..., a x_i, ...)`` via four chirp shears along axis ``i``.

    ``inverse`` runs the exact inverse (the adjoint) of the same factorization.
    """
    if a < 0 and not inverse:
        values = _parity_values(values, i, m)
    sgn, a = (a < 0), abs(a)
    if abs(a - 1) < 1e-15:
        v = values
    elif a < 1:
        # f(a x) is a scaling by 1/a on the Fourier side; the a > 1 branch
        # keeps the chirp intermediates tighter
        v = dft_values(values, m, axes=[i])
        v = _scale_values(v, i, m, 1.0 / a, inverse)
        v = dft_values(v, m, axes=[i], inverse=True)
    else:
        # diag(alpha, 1/alpha) = U(b1) L(c1) U(b2) L(c2), alpha = 1/a
        alpha = 1.0 / a
        g = np.sqrt(abs(alpha - 1) / alpha)
        b1, c1 = (alpha - 1) / g, g
        b2, c2 = (1 - alpha) / (alpha * g), -alpha * g
        ops = [(_axis_chirp, c2), (_axis_chirp_conv, b2), (_axis_chirp, c1), (_axis_chirp_conv, b1)]
        if inverse:
            ops = [(fn, -c) for fn, c in reversed(ops)]
        v = values
        for fn, c in ops:
            v = fn(v, i, m, c)
    if sgn and inverse:
        v = _parity_values(v, i, m)
    return v


def _parity_values(values, i: int, m: int) -> np.ndarray:
    N = values.shape[-1]
    src = (-(np.arange(N) - N // 2)) % N
    src = (src + N // 2) % N
    return np.take(values, src, axis=i - m)


def _is_integer_unimodular(L) -> bool:
    L = np.asarray(L, dtype=float)
    return (np.allclose(L, np.round(L), atol=1e-12)
            and abs(abs(np.linalg.det(np.round(L))) - 1) < 1e-9)


def _permute_values(values, L, m: int) -> np.ndarray:
    """``g[k] = f[L k mod N]`` on centered index offsets."""
    N = values.shape[-1]
    Li = np.round(np.asarray(L)).astype(np.int64)
    offs = np.indices((N,) * m).reshape(m, -1) - N // 2
    src = (Li @ offs + N // 2) % N
    flat = np.ravel_multi_index(tuple(src), (N,) * m)
    batch = values.shape[:-m]
    out = values.reshape(batch + (N ** m,))[..., flat]
    return out.reshape(values.shape)


def _elementary_shears(T, lower: bool) -> list:
    """Unit triangular ``T`` as an ordered list ``[(i, j, l), ...]`` of
    elementary factors ``I + l e_i e_j^T`` whose product, in list order, is ``T``."""
    m = T.shape[0]
    out = []
    cols = range(m) if lower else range(m - 1, -1, -1)
    for k in cols:
        rows = range(k + 1, m) if lower else range(k)
        for i in rows:
            if T[i, k] != 0:
                out.append((i, k, float(T[i, k])))
    return out


def _lu_plan(L) -> list:
    P, Lo, U = scipy.linalg.lu(L)
    diag = np.diag(U).copy()
    Up = U / diag[:, None]
    steps = []
    if not np.allclose(P, np.eye(len(L))):
        steps.append(("perm", P))
    for i, j, l in _elementary_shears(Lo, lower=True):
        steps.append(("shear", i, j, l))
    for i, a in enumerate(diag):
        if abs(abs(a) - 1) < 1e-12:
            a = np.sign(a)
        if a != 1.0:
            steps.append(("scale", i, float(a)))
    for i, j, l in _elementary_shears(Up, lower=False):
        steps.append(("shear", i, j, l))
    return steps


ROTATION_PIECE = np.pi / 8


def _rotation_steps(i: int, j: int, theta: float) -> list:
    """Rotation by ``theta`` in the ``(i, j)`` plane: exact quarter turns, then
    three shears per piece of at most ``ROTATION_PIECE``."""
    m = max(i, j) + 1
    steps = []
    quarters = int(np.round(theta / (np.pi / 2)))
    rest = theta - quarters * np.pi / 2
    if quarters % 4:
        R = np.eye(m)
        c, s_ = np.round(np.cos(quarters * np.pi / 2)), np.round(np.sin(quarters * np.pi / 2))
        R[i, i], R[i, j], R[j, i], R[j, j] = c, -s_, s_, c
        steps.append(("perm", R))
    if abs(rest) > 1e-15:
        pieces = max(1, int(np.ceil(abs(rest) / ROTATION_PIECE)))
        r = rest / pieces
        t = np.tan(r / 2)
        steps += [("shear", i, j, -t), ("shear", j, i, float(np.sin(r))), ("shear", i, j, -t)] * pieces
    return steps


def _orthogonal_steps(Q) -> list:
    """Plane rotations and sign flips whose product, in list order, is ``Q``."""
    Q = np.array(Q, dtype=float)
    m = len(Q)
    rots = []
    # Givens reduction G_k ... G_1 Q = diag(+-1), so Q = G_1^T ... G_k^T diag
    for j in range(m):
        for i in range(m - 1, j, -1):
            a, b = Q[j, j], Q[i, j]
            if abs(b) < 1e-15:
                continue
            theta = np.arctan2(b, a)
            c, s_ = np.cos(theta), np.sin(theta)
            G = np.eye(m)
            G[j, j], G[j, i], G[i, j], G[i, i] = c, s_, -s_, c
            Q = G @ Q
            rots.append((j, i, theta))
    steps = []
    for j, i, theta in rots:
        steps += _pad_steps(_rotation_steps(j, i, theta), m)
    signs = np.sign(np.diag(Q))
    if np.any(signs < 0):
        steps.append(("perm", np.diag(signs)))
    return steps


def _pad_steps(steps: list, m: int) -> list:
    out = []
    for st in steps:
        if st[0] == "perm" and len(st[1]) < m:
            P = np.eye(m)
            P[:len(st[1]), :len(st[1])] = st[1]
            st = ("perm", P)
        out.append(st)
    return out


def _svd_plan(L) -> list:
    U, sv, Vt = np.linalg.svd(L)
    steps = _orthogonal_steps(U)
    steps += [("scale", i, float(a)) for i, a in enumerate(sv) if abs(a - 1) > 1e-15]
    return steps + _orthogonal_steps(Vt)


def plan_matrix(steps: list, m: int) -> np.ndarray:
    """Product, in list order, of the matrices of ``steps``."""
    M = np.eye(m)
    for st in steps:
        if st[0] == "perm":
            S = np.asarray(st[1], dtype=float)
        elif st[0] == "shear":
            S = np.eye(m)
            S[st[1], st[2]] = st[3]
        else:
            S = np.eye(m)
            S[st[1], st[1]] = st[2]
        M = M @ S
    return M


def _run_plan(values, steps: list, m: int, inverse: bool = False) -> np.ndarray:
    """Apply ``steps`` in order, or their exact inverses in reverse order."""
    v = values
    for step in (reversed(steps) if inverse else steps):
        if step[0] == "perm":
            P = np.round(np.asarray(step[1])).astype(np.int64)
            if inverse:
                P = np.round(np.linalg.inv(P)).astype(np.int64)
            v = _permute_values(v, P, m)
        elif step[0] == "shear":
            _, i, j, l = step
            v = _shear_values(v, i, j, -l if inverse else l, m)
        else:
            _, i, a = step
            v = _scale_values(v, i, m, a, inverse)
    return v


@functools.lru_cache(maxsize=256)
def _calibrated_plan(key: bytes, m: int, N: int) -> str:
    L = np.frombuffer(key).reshape(m, m)
    # centered unit Gaussian and its exact dilation on this grid
    X = np.stack([c.ravel() for c in np.meshgrid(*[_coord(N, 1, 0).ravel()] * m, indexing="ij")])
    g = np.exp(-np.pi * np.sum(X ** 2, axis=0)).reshape((N,) * m)
    LX = L @ X
    ref = np.sqrt(abs(np.linalg.det(L))) * np.exp(-np.pi * np.sum(LX ** 2, axis=0)).reshape((N,) * m)
    errs = {name: float(np.max(np.abs(_run_plan(g, fn(L), m) - ref)))
            for name, fn in PLANS.items()}
    return min(errs, key=errs.get)


PLANS = {"lu": _lu_plan, "svd": _svd_plan}


def dilation_plan(L, N: Optional[int] = None) -> list:
    """Factor ``L`` into exactly-unitary steps, in application order.

    Steps are ``("perm", P)``, ``("shear", i, j, l)`` and ``("scale", i, a)``;
    their matrices multiply, in list order, to ``L``.  Two factorizations are
    available: pivoted LU, and SVD with rotations as three small shears.  LU is
    used when it needs no scaling; otherwise, given a grid size ``N``, the one
    that better reproduces a dilated Gaussian on that grid is returned.
    """
    L = sp._invertible(L)
    lu = _lu_plan(L)
    if N is None or all(st[0] != "scale" or abs(st[2]) == 1 for st in lu):
        # shears and sign flips only: exact on every band-limited input
        return lu
    L = np.ascontiguousarray(L, dtype=float)
    return PLANS[_calibrated_plan(L.tobytes(), len(L), int(N))](L)


def dilate_values(values, L, m: int, mode: str = "auto", inverse: bool = False) -> np.ndarray:
    """``|det L|^{1/2} f(L.)`` on the trailing ``m`` axes.

    ``inverse`` applies the exact inverse of that operator, which is the
    dilation by ``L^{-1}`` up to discretization.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape != (m, m):
        raise EngineError(f"dilation matrix must be {m}x{m}, got {L.shape}")
    if mode not in ("auto", "exact", "bandlimited"):
        raise ModeError(f"unknown dilation mode {mode!r}")
    if sp.is_singular(L):
        raise EngineError("dilation matrix is (nearly) singular")
    exact_ok = _is_integer_unimodular(L)
    if mode == "exact" and not exact_ok:
        raise ModeError("exact mode needs an integer matrix with |det| = 1")
    if exact_ok and mode != "bandlimited":
        P = np.round(np.linalg.inv(L)) if inverse else L
        return _permute_values(values, P, m)
    return _run_plan(values, dilation_plan(L, values.shape[-1]), m, inverse)


def edge_energy(values, m: int, margin: float = 0.125) -> float:
    """Fraction of energy in the outer ``margin`` of the box or of the band."""
    N = values.shape[-1]
    k = max(1, int(round(margin * N)))
    total = float(np.sum(np.abs(values) ** 2))
    if total == 0:
        return 0.0

    def outer(v):
        mask = np.zeros((N,) * m, dtype=bool)
        for i in range(m):
            idx = [slice(None)] * m
            idx[i] = np.r_[0:k, N - k:N]
            mask[tuple(idx)] = True
        return float(np.sum(np.abs(v[..., mask]) ** 2))

    return max(outer(values), outer(dft_values(values, m))) / total


@dataclass
class DilationResult:
    signal: Signal
    error_estimate: float


def apply_dilation(L, f: Signal, mode: str = "bandlimited") -> DilationResult:
    """``|det L|^{1/2} f(L.)``.

    ``exact`` mode permutes samples and needs an integer ``L`` with ``|det| = 1``.
    ``bandlimited`` mode composes trigonometric shears; it is unitary for every
    ``L`` and accurate for signals concentrated well inside the box and band.
    The error estimate is the edge energy fraction of input and output.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    m = f.grid.dim
    out = dilate_values(f.values, L, m, mode)
    est = 0.0 if mode == "exact" else max(edge_energy(f.values, m), edge_energy(out, m))
    return DilationResult(f.replace(out), est)


# ------------------------------------------------------------- generator words

@dataclass(frozen=True)
class Fourier:
    inverse: bool = False

    def matrix(self, m: int) -> np.ndarray:
        return -sp.J(m) if self.inverse else sp.J(m)

    def apply(self, values, m: int):
        return dft_values(values, m, inverse=self.inverse)

    def inverted(self) -> "Fourier":
        return Fourier(not self.inverse)


@dataclass(frozen=True)
class PartialFourier:
    axes: tuple
    inverse: bool = False

    def matrix(self, m: int) -> np.ndarray:
        M = np.eye(2 * m)
        s = -1.0 if self.inverse else 1.0
        for i in self.axes:
            M[i, i] = M[m + i, m + i] = 0.0
            M[i, m + i] = s
            M[m + i, i] = -s
        return M

    def apply(self, values, m: int):
        return dft_values(values, m, axes=list(self.axes), inverse=self.inverse)

    def inverted(self) -> "PartialFourier":
        return PartialFourier(self.axes, not self.inverse)


@dataclass(frozen=True, eq=False)
class Dilation:
    L: np.ndarray
    mode: str = "auto"
    inverse: bool = False

    def matrix(self, m: int) -> np.ndarray:
        return sp.D(np.linalg.inv(self.L)) if self.inverse else sp.D(self.L)

    def apply(self, values, m: int):
        return dilate_values(values, self.L, m, self.mode, self.inverse)

    def inverted(self) -> "Dilation":
        return Dilation(self.L, self.mode, not self.inverse)


@dataclass(frozen=True, eq=False)
class ChirpMul:
    C: np.ndarray

    def matrix(self, m: int) -> np.ndarray:
        return sp.V(self.C)

    def apply(self, values, m: int):
        return chirp_mul_values(self.C, values, m)

    def inverted(self) -> "ChirpMul":
        return ChirpMul(-np.asarray(self.C))


@dataclass(frozen=True, eq=False)
class ChirpConv:
    C: np.ndarray

    def matrix(self, m: int) -> np.ndarray:
        return sp.VT(self.C)

    def apply(self, values, m: int):
        return chirp_conv_values(self.C, values, m)

    def inverted(self) -> "ChirpConv":
        return ChirpConv(-np.asarray(self.C))


@dataclass
class GeneratorWord:
    """Atoms applied left to right; ``matrix`` is the matching product
    ``M_k ... M_2 M_1``."""
    atoms: list = field(default_factory=list)

    def matrix(self, m: int) -> np.ndarray:
        M = np.eye(2 * m)
        for a in self.atoms:
            M = a.matrix(m) @ M
        return M

    def __add__(self, other: "GeneratorWord") -> "GeneratorWord":
        return GeneratorWord(list(self.atoms) + list(other.atoms))

    def inverse(self) -> "GeneratorWord":
        """Exact inverse (the adjoint) of this word's discrete action."""
        return GeneratorWord([a.inverted() for a in reversed(self.atoms)])

    def apply_values(self, values, m: int):
        for a in self.atoms:
            values = a.apply(values, m)
        return values


def apply_word(w: GeneratorWord, f: Signal) -> Signal:
    return f.replace(w.apply_values(f.values, f.grid.dim))


def free_word(A) -> GeneratorWord:
    """Word for a free matrix: chirp ``B^{-1}A``, Fourier, dilation ``B^{-1}``, chirp ``DB^{-1}``."""
    A = np.asarray(A, dtype=float)
    if not sp.is_free(A):
        raise sp.PreconditionError("matrix is not free (B block singular)")
    Aa, B, _, Dd = sp.blocks(A)
    Binv = np.linalg.inv(B)
    Q = Binv @ Aa
    P = Dd @ Binv
    Q, P = (Q + Q.T) / 2, (P + P.T) / 2
    atoms = []
    if np.any(Q):
        atoms.append(ChirpMul(Q))
    atoms.append(Fourier())
    if not np.allclose(Binv, np.eye(len(B)), atol=1e-15):
        atoms.append(Dilation(Binv))
    if np.any(P):
        atoms.append(ChirpMul(P))
    return GeneratorWord(atoms)


def decomposable_word(A) -> Optional[GeneratorWord]:
    """``[Dilation(L), PartialFourier(second half), ChirpMul(C)]`` when ``A = V_C A_FT2 D_L``."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] % 4:
        return None
    dec, _ = sp.wigner_decompose(A)
    if dec is None:
        return None
    d = A.shape[0] // 4
    atoms = [Dilation(dec.L), PartialFourier(tuple(range(d, 2 * d)))]
    if np.any(dec.C):
        atoms.append(ChirpMul(dec.C))
    return GeneratorWord(atoms)


def general_word(A) -> GeneratorWord:
    ff = sp.free_factorize(A)
    return free_word(ff.second) + free_word(ff.first)


def word_for(A) -> GeneratorWord:
    """Preferred word: the decomposable form when it exists, otherwise free factors."""
    w = decomposable_word(A)
    if w is not None:
        return w
    if sp.is_free(A):
        return free_word(A)
    return general_word(A)


# ---------------------------------------------------------------- free formula

def apply_free(A, f: Signal) -> Signal:
    """``mu(A) f`` for a free ``A``.

    Realizes ``|det B|^{-1/2} Phi_{DB^{-1}}(x) int f(y) e^{-2 pi i B^{-1}x.y}
    Phi_{B^{-1}A}(y) dy`` as chirp, centered DFT, dilation by ``B^{-1}``, chirp,
    which is exactly unitary on the grid.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2 * f.grid.dim,) * 2:
        raise EngineError(f"matrix shape {A.shape} does not match a {f.grid.dim}-axis signal")
    return apply_word(free_word(A), f)


def free_quadrature(A, f: Signal) -> Signal:
    """Riemann-sum evaluation of the free-matrix integral (dense, not unitary).

    Independent of the factored path in :func:`apply_free`; accurate for signals
    whose chirped spectrum stays below the grid's Nyquist frequency.
    """
    A = np.asarray(A, dtype=float)
    grid = f.grid
    m = grid.dim
    if not sp.is_free(A):
        raise sp.PreconditionError("matrix is not free (B block singular)")
    Aa, B, _, Dd = sp.blocks(A)
    Binv = np.linalg.inv(B)
    X = np.stack([c.ravel() for c in np.meshgrid(*([grid.points] * m), indexing="ij")])
    P = Dd @ Binv
    Q = Binv @ Aa
    qx = np.einsum("ik,ij,jk->k", X, (P + P.T) / 2, X)
    qy = np.einsum("ik,ij,jk->k", X, (Q + Q.T) / 2, X)
    kernel = np.exp(-2j * np.pi * (Binv @ X).T @ X)
    out = kernel @ (f.values.ravel() * np.exp(1j * np.pi * qy)) * grid.cell
    out *= np.exp(1j * np.pi * qx) / np.sqrt(abs(np.linalg.det(B)))
    return f.replace(out.reshape(grid.shape))


def apply_general(A, f: Signal) -> Signal:
    """``mu(A) f`` through the free factorization ``A = A1 A2``."""
    A = np.asarray(A, dtype=float)
    if A.shape != (2 * f.grid.dim,) * 2:
        raise EngineError(f"matrix shape {A.shape} does not match a {f.grid.dim}-axis signal")
    ff = sp.free_factorize(A)
    return apply_free(ff.first, apply_free(ff.second, f))


def apply_values(A, values: np.ndarray, m: int, path: str = "general",
                 inverse: bool = False) -> np.ndarray:
    """Batched application on raw arrays; ``path`` is ``general`` or ``word``.

    ``inverse`` applies the exact inverse of the same discrete operator.
    """
    A = np.asarray(A, dtype=float)
    w = general_word(A) if path == "general" else word_for(A)
    if inverse:
        w = w.inverse()
    return w.apply_values(values, m)


@dataclass
class DenseOperator:
    matrix: np.ndarray
    unitarity_defect: float


def dense_matrix_of(A, grid: Grid, cap: Optional[int] = None, path: str = "general",
                    chunk: int = 512) -> DenseOperator:
    """Dense matrix whose columns are ``mu(A)`` applied to impulses."""
    cap = oracle_cap() if cap is None else cap
    n = grid.size
    if n > cap:
        raise ResourceError(f"{n} columns exceed the dense-oracle cap {cap}")
    A = np.asarray(A, dtype=float)
    if A.shape != (2 * grid.dim,) * 2:
        raise EngineError(f"matrix shape {A.shape} does not match grid dimension {grid.dim}")
    w = general_word(A) if path == "general" else word_for(A)
    U = np.empty((n, n), dtype=complex)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        basis = np.zeros((stop - start, n), dtype=complex)
        basis[np.arange(stop - start), np.arange(start, stop)] = 1.0
        out = w.apply_values(basis.reshape((stop - start,) + grid.shape), grid.dim)
        U[:, start:stop] = out.reshape(stop - start, n).T
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(n))))
    return DenseOperator(U, defect)
