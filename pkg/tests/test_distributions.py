import numpy as np
import pytest
from hypothesis import given, strategies as st

from metawig import distributions as ds
from metawig import engine as en
from metawig import symplectic as sp


def rand_signal(grid, rng):
    return en.Signal(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


@pytest.fixture
def g32():
    return en.Grid(32)


def test_distribution_shape_checked():
    with pytest.raises(ds.DistributionError):
        ds.Distribution(en.Grid(8, 2), np.zeros((8, 4)))


def test_grid_mismatch(g32):
    with pytest.raises(ds.DistributionError):
        ds.stft(en.gaussian(g32), en.gaussian(en.Grid(16)))


def test_stft_gaussian_modulus():
    # |V_phi phi(x, xi)| = exp(-pi (x^2 + xi^2) / 2)
    g = en.Grid(64)
    phi = en.gaussian(g)
    X, XI = g.with_dim(2).coords()
    V = ds.stft(phi, phi).values
    assert np.max(np.abs(np.abs(V) - np.exp(-np.pi * (X ** 2 + XI ** 2) / 2))) < 1e-10


def test_wigner_gaussian_closed_form():
    g = en.Grid(64)
    X, XI = g.with_dim(2).coords()
    W = ds.wigner(en.gaussian(g)).values
    assert np.max(np.abs(W - 2 * np.exp(-2 * np.pi * (X ** 2 + XI ** 2)))) < 1e-10


def test_rihaczek_product(g32, rng):
    f, g = rand_signal(g32, rng), rand_signal(g32, rng)
    gh = en.dft_centered(g).values
    x = g32.points
    ref = np.multiply.outer(f.values, np.conj(gh)) * np.exp(-2j * np.pi * np.multiply.outer(x, x))
    assert np.allclose(ds.rihaczek(f, g).values, ref, atol=1e-12)


def test_tau_range(g32):
    with pytest.raises(ds.DistributionError):
        ds.tau_wigner(1.5, en.gaussian(g32), en.gaussian(g32))


@pytest.mark.parametrize("tau", [0.0, 0.3, 0.5, 1.0])
def test_metaplectic_tau_matches_direct(tau, g32):
    f, g = en.gaussian(g32, center=0.1), en.gaussian(g32, freq=-0.2)
    W = ds.metaplectic_wigner(sp.A_tau(tau), f, g, path="word").values
    assert en.align_phase(W, ds.tau_wigner(tau, f, g).values)[0] < 1e-5


def test_metaplectic_stft(g32):
    f, g = en.gaussian(g32, center=0.2), en.gaussian(g32, width=1.2)
    W = ds.metaplectic_wigner(sp.A_ST(), f, g, path="word").values
    assert en.align_phase(W, ds.stft(f, g).values)[0] < 1e-10


@given(seed=st.integers(0, 10 ** 6), tau=st.floats(0, 1))
def test_moyal(seed, tau):
    rng = np.random.default_rng(seed)
    grid = en.Grid(16)
    f1, g1, f2, g2 = (rand_signal(grid, rng) for _ in range(4))
    assert ds.moyal_defect(sp.A_tau(tau), f1, g1, f2, g2) < 1e-9


def test_moyal_random_word(rng):
    A = sp.random_symplectic(rng, 2)
    grid = en.Grid(16)
    f1, g1, f2, g2 = (rand_signal(grid, rng) for _ in range(4))
    assert ds.moyal_defect(A, f1, g1, f2, g2) < 1e-9


def test_dense_path_matches_word():
    grid = en.Grid(8)
    rng = np.random.default_rng(3)
    f, g = rand_signal(grid, rng), rand_signal(grid, rng)
    A = sp.random_symplectic(rng, 2)
    a = ds.metaplectic_wigner(A, f, g, path="dense").values
    b = ds.metaplectic_wigner(A, f, g, path="word").values
    assert en.align_phase(a, b)[0] < 1e-10


def test_dense_path_cap(g32):
    f = en.gaussian(g32)
    with pytest.raises(en.ResourceError):
        ds.metaplectic_wigner(sp.A_tau(0.5), f, f, path="dense", cap=100)


def test_unknown_path(g32):
    f = en.gaussian(g32)
    with pytest.raises(Exception):
        ds.metaplectic_wigner(sp.A_tau(0.5), f, f, path="nope")


def test_fast_path_against_finer_grid():
    # the N = 16 grid points are every other N = 64 point inside [-2, 2)
    from metawig.verify import fast_family
    f, F = en.gaussian(en.Grid(16)), en.gaussian(en.Grid(64))
    idx = np.arange(16, 48, 2)
    for A in fast_family(np.random.default_rng(7), 3):
        a = ds.metaplectic_wigner(A, f, f, path="fast").values
        ref = ds.metaplectic_wigner(A, F, F, path="fast").values[np.ix_(idx, idx)]
        assert en.align_phase(a, ref)[0] < 5e-6


def test_fast_path_matches_dense():
    from metawig.verify import fast_family
    f = en.gaussian(en.Grid(16))
    for A in fast_family(np.random.default_rng([0, 5]), 3):
        a = ds.metaplectic_wigner(A, f, f, path="fast").values
        b = ds.metaplectic_wigner(A, f, f, path="dense").values
        assert en.align_phase(a, b)[0] < 1e-5


@pytest.mark.parametrize("N,tau", [(32, 0.5), (32, 0.3), (64, None)])
def test_fast_path_matches_direct(N, tau):
    # the direct forms wrap windows periodically; the grids are large enough
    # that the wrapped tails are negligible
    g = en.Grid(N)
    f, h = en.gaussian(g, center=0.1), en.gaussian(g, freq=-0.2)
    if tau is None:
        A, ref = sp.A_ST(), ds.stft(f, h)
    else:
        A, ref = sp.A_tau(tau), ds.tau_wigner(tau, f, h)
    assert ds.fast_available(A)
    a = ds.metaplectic_wigner(A, f, h, path="fast").values
    assert en.align_phase(a, ref.values)[0] < 1e-5


def test_fast_unavailable():
    assert not ds.fast_available(sp.A_tau(0.0))
    assert not ds.fast_available(sp.J(2))


def test_covariance(g32):
    # W_A(pi(z) f, pi(z) g) = T_z W_A(f, g) for covariant A, grid-aligned z
    f, g = en.gaussian(g32, center=0.1), en.gaussian(g32, freq=0.1)
    z = (2, -3)
    for tau in (0.0, 0.5, 1.0):
        A = sp.A_tau(tau)
        W = ds.metaplectic_wigner(A, f, g, path="word").values
        Ws = ds.metaplectic_wigner(A, ds.tf_shift(f, z), ds.tf_shift(g, z), path="word").values
        assert np.max(np.abs(np.abs(Ws) - np.abs(np.roll(W, z, axis=(0, 1))))) < 1e-5


def test_upsample_keeps_samples(g32, rng):
    f = en.gaussian(g32, center=0.2, freq=0.1)
    u = ds.upsample(f, 2)
    assert u.grid.N == 4 * g32.N
    # coarse point j sits at fine index 2 j + N
    sub = u.values[g32.N:3 * g32.N:2]
    assert np.allclose(sub, f.values, atol=1e-12)
    assert u.norm() == pytest.approx(f.norm(), rel=1e-6)


def test_tf_shift_moves_modulus(g32):
    f = en.gaussian(g32)
    h = ds.tf_shift(f, (3, 5))
    assert np.allclose(np.abs(h.values), np.roll(np.abs(f.values), 3))
    with pytest.raises(ds.DistributionError):
        ds.tf_shift(f, (1, 2, 3))


def test_shift_invertibility_trials(g32):
    f, g = en.gaussian(g32, center=0.1), en.gaussian(g32, freq=-0.2)
    assert ds.shift_invertibility_trial(sp.A_ST(), f, g, (2, -1))["value"] < 1e-12
    assert ds.shift_invertibility_trial(sp.A_tau(0.5), f, g, (2, 2), path="fast")["value"] < 1e-6
    with pytest.raises(ds.DistributionError):
        ds.shift_invertibility_trial(sp.A_tau(0.5), f, g, (1, 0))


def test_cohen_kernel_reproduces_tau(g32):
    f, g = en.gaussian(g32, center=0.1), en.gaussian(g32, freq=-0.1)
    W = ds.metaplectic_wigner(sp.A_tau(0.5), f, g, path="word")
    for tau in (0.25, 0.75):
        conv = ds.cohen_apply(W, ds.cohen_kernel(sp.A_tau(tau), g32)).values
        ref = ds.metaplectic_wigner(sp.A_tau(tau), f, g, path="word").values
        assert en.align_phase(conv, ref)[0] < 1e-4


def test_cohen_kernel_of_wigner_is_delta(g32):
    K = ds.cohen_kernel(sp.A_tau(0.5), g32)
    W = ds.wigner(en.gaussian(g32, center=0.3))
    assert np.allclose(ds.cohen_apply(W, K).values, W.values, atol=1e-12)


def test_fundamental_identity():
    grid = en.Grid(128)
    f, g = en.gaussian(grid, center=0.1), en.gaussian(grid, freq=-0.2)
    for A in (sp.A_tau(0.3), sp.A_ST(), sp.A_tau(0.5)):
        assert ds.fundamental_identity_check(A, f, g)["value"] < 1e-9


def test_stft_recovery(g32):
    f = en.gaussian(g32, center=0.2)
    g1, g2, g3 = en.gaussian(g32), en.gaussian(g32, width=1.2), en.gaussian(g32, freq=0.1)
    r = ds.stft_recovery(f, g1, g2, g3, (2, -1))
    assert r["error"] < 1e-8


def test_stft_recovery_orthogonal_windows(g32):
    f = en.gaussian(g32)
    g1 = en.gaussian(g32)
    g2 = ds.tf_shift(g1, (0, g32.N // 2))
    g2 = g2.replace(g2.values - g2.inner(g1) * g1.values)
    with pytest.raises(sp.PreconditionError):
        ds.stft_recovery(f, g1, g2, g1, (0, 0))
