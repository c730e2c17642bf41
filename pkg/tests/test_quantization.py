import numpy as np
import pytest
from hypothesis import given, strategies as st

from metawig import engine as en
from metawig import quantization as qz
from metawig import symplectic as sp
from metawig.verify import COARSE_SYMBOLS, RESOLVED_SYMBOLS

G16 = en.Grid(16)


def dft_matrix(N):
    return en.dft_values(np.eye(N), 1, axes=[0])


def gauss_sym(grid, chirp=0.0):
    return qz.symbol_from_function(
        lambda X, XI: np.exp(-np.pi * (X[0] ** 2 + XI[0] ** 2) + 1j * np.pi * chirp * X[0] ** 2),
        grid)


def test_weyl_of_position_is_multiplication():
    a = qz.symbol_from_function(lambda X, XI: X[0] + 0 * XI[0], G16)
    assert np.allclose(qz.op_weyl(a, G16).matrix, np.diag(G16.points), atol=1e-12)


def test_weyl_of_frequency_symbol_is_multiplier():
    a = qz.symbol_from_function(lambda X, XI: np.exp(-np.pi * XI[0] ** 2) + 0 * X[0], G16)
    F = dft_matrix(16)
    ref = F.conj().T @ np.diag(np.exp(-np.pi * G16.points ** 2)) @ F
    assert np.allclose(qz.op_weyl(a, G16).matrix, ref, atol=1e-12)


def test_kohn_nirenberg_product_symbol():
    # A_0 quantizes b(x) c(xi) as b(x) F^{-1} c F
    x = G16.points
    a = qz.symbol_from_function(
        lambda X, XI: np.exp(-np.pi * X[0] ** 2) * np.exp(-np.pi * (XI[0] - 0.2) ** 2), G16)
    F = dft_matrix(16)
    ref = np.diag(np.exp(-np.pi * x ** 2)) @ F.conj().T @ np.diag(
        np.exp(-np.pi * (x - 0.2) ** 2)) @ F
    M = qz.op_general(sp.A_tau(0.0), a, G16).matrix
    assert en.align_phase(M, ref)[0] < 1e-10


@pytest.mark.parametrize("k", range(len(RESOLVED_SYMBOLS)))
def test_general_half_is_weyl(k):
    a = qz.symbol_from_function(RESOLVED_SYMBOLS[k], G16)
    G = qz.op_general(sp.A_tau(0.5), a, G16).matrix
    assert np.max(np.abs(G - qz.op_weyl(a, G16).matrix)) < 1e-6


@pytest.mark.parametrize("k", range(len(COARSE_SYMBOLS)))
def test_general_half_is_weyl_fine_grid(k):
    g = en.Grid(32)
    a = qz.symbol_from_function(COARSE_SYMBOLS[k], g)
    G = qz.op_general(sp.A_tau(0.5), a, g).matrix
    assert np.max(np.abs(G - qz.op_weyl(a, g).matrix)) < 1e-6


def test_weyl_real_symbol_selfadjoint():
    for fn in (RESOLVED_SYMBOLS[0], COARSE_SYMBOLS[0], COARSE_SYMBOLS[2]):
        W = qz.op_weyl(qz.symbol_from_function(fn, G16), G16).matrix
        assert np.max(np.abs(W - W.conj().T)) < 1e-12


@given(tau=st.floats(0, 1))
def test_op_one_is_identity(tau):
    M = qz.op_general(sp.A_tau(tau), qz.constant_symbol(G16), G16).matrix
    assert np.max(np.abs(M - np.eye(16))) < 1e-8


def test_weyl_one_is_identity():
    assert np.allclose(qz.op_weyl(qz.constant_symbol(G16), G16).matrix, np.eye(16), atol=1e-12)


@given(seed=st.integers(0, 10 ** 6))
def test_change_of_quantization(seed):
    rng = np.random.default_rng(seed)
    A, B = sp.A_tau(0.5), sp.random_symplectic(rng, 2)
    a = gauss_sym(G16, 0.5)
    b = qz.change_quantization(A, B, a)
    assert np.max(np.abs(qz.change_quantization(B, A, b).values - a.values)) < 1e-7
    OA = qz.op_general(A, a, G16).matrix
    OB = qz.op_general(B, b, G16).matrix
    assert en.align_phase(OB, OA)[0] < 1e-7


@pytest.mark.parametrize("A", [sp.A_tau(0.5), sp.A_ST(), sp.A_tau(0.2)])
def test_kernel_vs_duality(A):
    assert qz.assembly_defect(A, gauss_sym(G16, 0.5), G16) < 1e-10


def test_duality_identity(rng):
    op = qz.op_general(sp.A_tau(0.3), gauss_sym(G16, 0.25), G16)
    assert op.duality_defect(rng) < 1e-10


def test_symbol_grid_checked():
    with pytest.raises(qz.QuantizationError):
        qz.op_general(sp.A_tau(0.5), gauss_sym(en.Grid(8)), G16)


def test_unknown_assembly():
    with pytest.raises(qz.QuantizationError):
        qz.op_general(sp.A_tau(0.5), gauss_sym(G16), G16, assembly="magic")


def test_cap():
    with pytest.raises(en.ResourceError):
        qz.op_general(sp.A_tau(0.5), gauss_sym(G16), G16, cap=8)


def test_kernel_dimension_checked():
    with pytest.raises(sp.DimensionError):
        qz.kernel_of(sp.J(1), gauss_sym(G16))


@pytest.mark.parametrize("A", [sp.A_tau(0.5), sp.A_ST()])
@pytest.mark.parametrize("chirp", [0.0, 0.5])
def test_intertwining(A, chirp):
    f, g = en.gaussian(G16, center=0.1), en.gaussian(G16, freq=-0.1)
    r = qz.intertwining_check(A, gauss_sym(G16, chirp), f, g)
    assert r["value"] < 1e-4
    assert r["method"] == "closed_form"


def test_intertwining_dimension():
    g = en.Grid(4, 2)
    a = qz.constant_symbol(g)
    with pytest.raises(qz.QuantizationError):
        qz.intertwining_check(sp.A_tau(0.5, 2), a, en.gaussian(g), en.gaussian(g))
