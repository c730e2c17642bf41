"""Block-matrix algebra over the real symplectic group.

Matrices are plain ``numpy`` arrays of shape ``(2m, 2m)``; :class:`SymplecticMatrix`
is a thin view that adds the 2x2 block decomposition ``(A, B, C, D)`` and, for
``m = 2d``, the 4x4 decomposition ``A_ij``.  Indices of the 4x4 view are 1-based
to match the usual notation: ``block(2, 3)`` is ``A_23``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TOL = 1e-9
SINGULAR = 1e-8

# deterministic part of the free-factorization scan, in order
FREE_SCAN = (0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5)
FREE_SCAN_RANDOM = 32
FREE_SCAN_SEED = 20230101


class SymplecticError(ValueError):
    """Base class for argument and precondition failures in this module."""


class DimensionError(SymplecticError):
    pass


class NotSymplecticError(SymplecticError):
    pass


class PreconditionError(SymplecticError):
    pass


class FactorizationError(SymplecticError):
    pass


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def _even(M) -> np.ndarray:
    M = _as_square(M)
    if M.shape[0] % 2:
        raise DimensionError(f"symplectic matrices have even size, got {M.shape[0]}")
    return M


def _quarter(M) -> np.ndarray:
    M = _even(M)
    if M.shape[0] % 4:
        raise DimensionError(
            f"a 4x4 block view needs size divisible by 4, got {M.shape[0]}"
        )
    return M


def max_abs(X) -> float:
    X = np.asarray(X)
    return float(np.max(np.abs(X))) if X.size else 0.0


def is_singular(M, threshold: float = SINGULAR) -> bool:
    """Determinant test scaled by the matrix magnitude."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 0:
        return False
    scale = max(max_abs(M), 1.0) ** n
    return abs(np.linalg.det(M)) <= threshold * scale


def blocks(M):
    """Return the 2x2 block view ``(A, B, C, D)``."""
    M = _even(M)
    m = M.shape[0] // 2
    return M[:m, :m], M[:m, m:], M[m:, :m], M[m:, m:]


def block(M, i: int, j: int) -> np.ndarray:
    """``A_ij`` of the 4x4 block view (1-based indices)."""
    M = _quarter(M)
    d = M.shape[0] // 4
    return M[(i - 1) * d:i * d, (j - 1) * d:j * d]


def from_blocks(rows: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    return np.block([[np.asarray(b, dtype=float) for b in r] for r in rows])


@dataclass(frozen=True)
class SymplecticMatrix:
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _even(self.entries).copy())

    @property
    def half_dim(self) -> int:
        return self.entries.shape[0] // 2

    def blocks(self):
        return blocks(self.entries)

    def block(self, i: int, j: int) -> np.ndarray:
        return block(self.entries, i, j)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        return SymplecticMatrix(self.entries @ np.asarray(other))

    @classmethod
    def checked(cls, M, tol: float = TOL) -> "SymplecticMatrix":
        report = check_symplectic(M, tol)
        if not report.ok:
            raise NotSymplecticError("; ".join(report.failures))
        return cls(np.asarray(M, dtype=float))

    def to_json(self) -> str:
        return matrix_to_json(self.entries)


def matrix_to_json(M) -> str:
    M = _even(M)
    return json.dumps({"half_dim": M.shape[0] // 2, "rows": M.tolist()})


def matrix_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    rows = np.asarray(obj["rows"], dtype=float)
    m = int(obj["half_dim"])
    if rows.shape != (2 * m, 2 * m):
        raise DimensionError(f"half_dim {m} does not match rows of shape {rows.shape}")
    return rows


# ----------------------------------------------------------------- generators

def J(m: int) -> np.ndarray:
    I, Z = np.eye(m), np.zeros((m, m))
    return from_blocks([[Z, I], [-I, Z]])


def _symmetric(C, what="C") -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] != C.shape[1]:
        raise SymplecticError(f"{what} must be square, got {C.shape}")
    if max_abs(C - C.T) > TOL * max(1.0, max_abs(C)):
        raise SymplecticError(f"{what} must be symmetric")
    return (C + C.T) / 2


def _invertible(L) -> np.ndarray:
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape[0] != L.shape[1]:
        raise SymplecticError(f"L must be square, got {L.shape}")
    if is_singular(L):
        raise SymplecticError("L must be invertible")
    return L


def D(L) -> np.ndarray:
    """``D_L = diag(L^{-1}, L^T)``."""
    L = _invertible(L)
    Z = np.zeros_like(L)
    return from_blocks([[np.linalg.inv(L), Z], [Z, L.T]])


def V(C) -> np.ndarray:
    """Lower shear ``V_C = [[I, 0], [C, I]]``."""
    C = _symmetric(C)
    I, Z = np.eye(len(C)), np.zeros_like(C)
    return from_blocks([[I, Z], [C, I]])


def VT(C) -> np.ndarray:
    """Upper shear ``V_C^T``."""
    return V(C).T


def A_FT2(d: int) -> np.ndarray:
    I, Z = np.eye(d), np.zeros((d, d))
    return from_blocks([
        [I, Z, Z, Z],
        [Z, Z, Z, I],
        [Z, Z, I, Z],
        [Z, -I, Z, Z],
    ])


def A_tau(tau: float, d: int = 1) -> np.ndarray:
    I, Z = np.eye(d), np.zeros((d, d))
    return from_blocks([
        [(1 - tau) * I, tau * I, Z, Z],
        [Z, Z, tau * I, -(1 - tau) * I],
        [Z, Z, I, I],
        [-I, I, Z, Z],
    ])


def A_ST(d: int = 1) -> np.ndarray:
    I, Z = np.eye(d), np.zeros((d, d))
    return from_blocks([
        [I, -I, Z, Z],
        [Z, Z, I, I],
        [Z, Z, Z, -I],
        [-I, Z, Z, Z],
    ])


def make_generator(kind: str, *, m: Optional[int] = None, d: Optional[int] = None,
                   L=None, C=None, tau: Optional[float] = None) -> np.ndarray:
    """Build one of the named generator matrices.

    ``kind`` is one of ``J``, ``D_L``, ``V_C``, ``V_CT``, ``A_FT2``, ``A_tau``,
    ``A_ST``.  ``m`` is the half dimension for ``J``; ``d`` the signal dimension
    for the 4d x 4d matrices.
    """
    if kind == "J":
        return J(m or 1)
    if kind == "D_L":
        return D(L)
    if kind == "V_C":
        return V(C)
    if kind in ("V_CT", "V_C^T"):
        return VT(C)
    if kind == "A_FT2":
        return A_FT2(d or 1)
    if kind == "A_tau":
        if tau is None:
            raise SymplecticError("A_tau needs tau")
        return A_tau(tau, d or 1)
    if kind == "A_ST":
        return A_ST(d or 1)
    raise SymplecticError(f"unknown generator kind {kind!r}")


# ------------------------------------------------------------------ predicates

@dataclass
class SymplecticCheck:
    ok: bool
    defect: float
    det: float
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_symplectic(M, tol: float = TOL) -> SymplecticCheck:
    """Test ``M^T J M = J`` and report which block conditions fail.

    The block conditions checked are the ones equivalent to ``M^T J M = J``:
    ``A^T C`` symmetric, ``B^T D`` symmetric, ``A^T D - C^T B = I``.
    """
    M = _even(M)
    m = M.shape[0] // 2
    Jm = J(m)
    defect = max_abs(M.T @ Jm @ M - Jm)
    A, B, C, Dd = blocks(M)
    failures = []
    if max_abs(A.T @ C - C.T @ A) > tol:
        failures.append("A^T C is not symmetric")
    if max_abs(B.T @ Dd - Dd.T @ B) > tol:
        failures.append("B^T D is not symmetric")
    if max_abs(A.T @ Dd - C.T @ B - np.eye(m)) > tol:
        failures.append("A^T D - C^T B != I")
    det = float(np.linalg.det(M))
    if abs(det - 1) > max(tol, 1e-7) and not failures:
        failures.append(f"det = {det} != 1")
    if defect > tol and not failures:
        failures.append(f"symplectic defect {defect:.3e} exceeds {tol:.1e}")
    return SymplecticCheck(ok=defect <= tol and not failures, defect=defect, det=det,
                           failures=failures)


def symplectic_inverse(M, tol: float = TOL) -> np.ndarray:
    """``[[D^T, -B^T], [-C^T, A^T]]``."""
    report = check_symplectic(M, tol)
    if not report.ok:
        raise NotSymplecticError("; ".join(report.failures))
    A, B, C, Dd = blocks(M)
    return from_blocks([[Dd.T, -B.T], [-C.T, A.T]])


def is_free(M) -> bool:
    return not is_singular(blocks(M)[1])


def shift_matrix(M) -> np.ndarray:
    """``E_A = [[A11, A13], [A21, A23]]``."""
    M = _quarter(M)
    return from_blocks([[block(M, 1, 1), block(M, 1, 3)],
                        [block(M, 2, 1), block(M, 2, 3)]])


def covariant_pattern(M) -> np.ndarray:
    """The covariant matrix determined by the free blocks ``A11, A13, A21`` of ``M``."""
    M = _quarter(M)
    d = M.shape[0] // 4
    I, Z = np.eye(d), np.zeros((d, d))
    A11, A13, A21 = block(M, 1, 1), block(M, 1, 3), block(M, 2, 1)
    return from_blocks([
        [A11, I - A11, A13, A13],
        [A21, -A21, I - A11.T, -A11.T],
        [Z, Z, I, I],
        [-I, I, Z, Z],
    ])


def is_covariant(M, tol: float = TOL) -> tuple[bool, float]:
    """Pattern test for covariance; returns ``(flag, residual)``.

    The residual is the largest deviation from the covariant block pattern,
    including the asymmetry of ``A13`` and ``A21``.
    """
    M = _quarter(M)
    A13, A21 = block(M, 1, 3), block(M, 2, 1)
    residual = max(max_abs(M - covariant_pattern(M)),
                   max_abs(A13 - A13.T), max_abs(A21 - A21.T))
    return residual <= tol, residual


def cohen_matrix(M, tol: float = TOL) -> np.ndarray:
    """``B_A`` of a covariant matrix; checks ``V_{B_A}^T A_{1/2} = A``."""
    ok, residual = is_covariant(M, tol)
    if not ok:
        raise PreconditionError(f"matrix is not covariant (residual {residual:.3e})")
    M = np.asarray(M, dtype=float)
    d = M.shape[0] // 4
    half = 0.5 * np.eye(d)
    A11, A13, A21 = block(M, 1, 1), block(M, 1, 3), block(M, 2, 1)
    B = from_blocks([[A13, half - A11], [half - A11.T, -A21]])
    B = (B + B.T) / 2
    rebuilt = VT(B) @ A_tau(0.5, d)
    if max_abs(rebuilt - M) > max(tol, 1e-10):
        raise PreconditionError("V_B^T A_1/2 does not reconstruct the matrix")
    return B


@dataclass
class Decomposition:
    C: np.ndarray
    L: np.ndarray

    def rebuild(self) -> np.ndarray:
        d = self.L.shape[0] // 2
        return V(self.C) @ A_FT2(d) @ D(self.L)


def wigner_decompose(M, tol: float = TOL) -> tuple[Optional[Decomposition], str]:
    """Split ``M = V_C A_FT2 D_L``; returns ``(decomposition or None, reason)``.

    The off-diagonal block of ``C`` is not fixed by ``M``: ``V`` with a purely
    off-diagonal symmetric matrix commutes past ``A_FT2`` into a position shear
    of ``L``.  The minimum-norm choice ``C_12 = 0`` is returned.
    """
    M = _quarter(M)
    d = M.shape[0] // 4
    scale = max(1.0, max_abs(M))
    zero_top = [block(M, 1, 3), block(M, 1, 4), block(M, 2, 1), block(M, 2, 2)]
    if max(max_abs(b) for b in zero_top) > tol * scale:
        return None, "top half does not have the A_FT2 D_L zero pattern"
    top1 = np.hstack([block(M, 1, 1), block(M, 1, 2)])
    top2 = np.hstack([block(M, 2, 3), block(M, 2, 4)])
    rhs1 = np.hstack([block(M, 3, 1), block(M, 3, 2)])
    rhs2 = np.hstack([block(M, 4, 3), block(M, 4, 4)])
    # C11 top1 = rhs1, C22 top2 = rhs2 (transposed least squares)
    C11 = np.linalg.lstsq(top1.T, rhs1.T, rcond=None)[0].T
    C22 = np.linalg.lstsq(top2.T, rhs2.T, rcond=None)[0].T
    residual = max(max_abs(C11 @ top1 - rhs1), max_abs(C22 @ top2 - rhs2))
    asym = max(max_abs(C11 - C11.T), max_abs(C22 - C22.T))
    if residual > tol * scale:
        return None, f"chirp block equations inconsistent (residual {residual:.3e})"
    if asym > tol * scale:
        return None, f"chirp blocks not symmetric (asymmetry {asym:.3e})"
    Z = np.zeros((d, d))
    C = from_blocks([[(C11 + C11.T) / 2, Z], [Z, (C22 + C22.T) / 2]])
    R = V(-C) @ M
    L = from_blocks([[block(R, 3, 3).T, block(R, 2, 3).T],
                     [block(R, 3, 4).T, block(R, 2, 4).T]])
    if is_singular(L):
        return None, "L is singular"
    dec = Decomposition(C=C, L=L)
    err = max_abs(dec.rebuild() - M)
    if err > max(tol, 1e-9) * scale:
        return None, f"reconstruction defect {err:.3e}"
    return dec, ""


def is_right_regular(L, threshold: float = SINGULAR) -> bool:
    L = _even(L)
    d = L.shape[0] // 2
    return not is_singular(L[:d, d:], threshold) and not is_singular(L[d:, d:], threshold)


@dataclass
class FreeFactorization:
    first: np.ndarray
    second: np.ndarray
    t: float


def free_factorize(M, tol: float = TOL) -> FreeFactorization:
    """Write ``M = A1 A2`` with both factors free.

    ``A1 = M V_{tI} J^{-1}`` and ``A2 = J V_{-tI}``; the B-block of ``A2`` is the
    identity and that of ``A1`` is ``-(A + tB)``.  ``t`` runs through
    ``FREE_SCAN`` and then ``FREE_SCAN_RANDOM`` draws from a fixed seed.
    """
    M = _even(M)
    m = M.shape[0] // 2
    A, B, _, _ = blocks(M)
    rng = np.random.default_rng(FREE_SCAN_SEED)
    candidates = list(FREE_SCAN) + list(rng.uniform(-3, 3, FREE_SCAN_RANDOM))
    best_t, best_det = None, -1.0
    for t in candidates:
        G = A + t * B
        if not is_singular(G):
            Jinv = -J(m)
            first = M @ V(t * np.eye(m)) @ Jinv
            second = J(m) @ V(-t * np.eye(m))
            return FreeFactorization(first=first, second=second, t=float(t))
        det = abs(np.linalg.det(G))
        if det > best_det:
            best_t, best_det = t, det
    raise FactorizationError(
        f"no free factorization found; best t = {best_t} with |det| = {best_det:.3e}"
    )


def fundamental_identity_matrix(M) -> np.ndarray:
    """``A' = A D_S J`` with ``S = diag(I, -I)``."""
    M = _quarter(M)
    d = M.shape[0] // 4
    S = np.diag(np.r_[np.ones(d), -np.ones(d)])
    return M @ D(S) @ J(2 * d)


# -------------------------------------------------------------- classification

@dataclass
class Classification:
    is_symplectic: bool
    is_free: bool = False
    is_covariant: bool = False
    is_shift_invertible: bool = False
    is_wigner_decomposable: bool = False
    shift_matrix: Optional[np.ndarray] = None
    cohen_matrix: Optional[np.ndarray] = None
    decomposition: Optional[Decomposition] = None
    right_regular: Optional[bool] = None
    reasons: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def arr(x):
            return None if x is None else np.asarray(x).tolist()
        return {
            "is_symplectic": self.is_symplectic,
            "is_free": self.is_free,
            "is_covariant": self.is_covariant,
            "is_shift_invertible": self.is_shift_invertible,
            "is_wigner_decomposable": self.is_wigner_decomposable,
            "shift_matrix": arr(self.shift_matrix),
            "cohen_matrix": arr(self.cohen_matrix),
            "decomposition": None if self.decomposition is None else {
                "C": arr(self.decomposition.C), "L": arr(self.decomposition.L)},
            "right_regular": self.right_regular,
            "reasons": list(self.reasons),
        }


def classify(M, tol: float = TOL) -> Classification:
    M = _even(M)
    report = check_symplectic(M, tol)
    if not report.ok:
        return Classification(is_symplectic=False, reasons=list(report.failures))
    out = Classification(is_symplectic=True, is_free=is_free(M))
    if not out.is_free:
        out.reasons.append("B block is singular (not free)")
    if M.shape[0] % 4:
        out.reasons.append("odd half dimension: Wigner-type predicates undefined")
        return out
    out.is_covariant, residual = is_covariant(M, tol)
    if out.is_covariant:
        out.cohen_matrix = cohen_matrix(M, tol)
    else:
        out.reasons.append(f"not covariant (pattern residual {residual:.3e})")
    E = shift_matrix(M)
    out.shift_matrix = E
    out.is_shift_invertible = not is_singular(E)
    if not out.is_shift_invertible:
        out.reasons.append("E_A is singular (not shift-invertible)")
    dec, why = wigner_decompose(M, tol)
    if dec is not None:
        out.is_wigner_decomposable = True
        out.decomposition = dec
        out.right_regular = is_right_regular(dec.L)
    else:
        out.reasons.append(f"not Wigner-decomposable: {why}")
    return out


# ------------------------------------------------------------ random matrices

def random_symplectic(rng: np.random.Generator, m: int, n_atoms: Optional[int] = None,
                      scale: float = 1.0) -> np.ndarray:
    """Product of random generator matrices (``J``, ``D_L``, ``V_C``).

    Entries of ``C`` and ``L - I`` are uniform in ``[-scale, scale]``; ``L`` is
    redrawn until it is comfortably invertible.
    """
    if n_atoms is None:
        n_atoms = int(rng.integers(5, 11))
    M = np.eye(2 * m)
    for _ in range(n_atoms):
        kind = rng.integers(3)
        if kind == 0:
            G = J(m)
        elif kind == 1:
            while True:
                L = np.eye(m) + rng.uniform(-scale, scale, (m, m)) * 0.5
                if abs(np.linalg.det(L)) > 0.25:
                    break
            G = D(L)
        else:
            C = rng.uniform(-scale, scale, (m, m))
            G = V((C + C.T) / 2)
        M = G @ M
    return M
