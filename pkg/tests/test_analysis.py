import numpy as np
import pytest
from hypothesis import given, strategies as st

from metawig import analysis as an
from metawig import distributions as ds
from metawig import engine as en
from metawig import symplectic as sp


def rand_signal(grid, rng):
    return en.Signal(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def unit(f):
    return f.replace(f.values / f.norm())


# ------------------------------------------------------------ mixed norms

def test_spec_validation():
    with pytest.raises(an.AnalysisError):
        an.MixedNormSpec(p=0)
    with pytest.raises(an.AnalysisError):
        an.MixedNormSpec(q=-1)


def test_weight():
    g = en.Grid(16, 2)
    assert np.all(an.weight(g, 0) == 1)
    X, XI = g.coords()
    assert np.allclose(an.weight(g, 2), 1 + X ** 2 + XI ** 2)


@pytest.mark.parametrize("p,q", [(1, 2), (2, 2), (3, 1.5)])
def test_mixed_norm_of_constant(p, q):
    N = 16
    F = ds.Distribution(en.Grid(N, 2), np.ones((N, N)))
    assert an.mixed_norm(F, an.MixedNormSpec(p, q)) == pytest.approx(N ** (0.5 / p + 0.5 / q))


def test_mixed_norm_inf():
    F = ds.Distribution(en.Grid(8, 2), np.arange(64.0).reshape(8, 8))
    assert an.mixed_norm(F, an.MixedNormSpec(np.inf, np.inf)) == 63.0


def test_mixed_norm_rejects_nan():
    F = ds.Distribution(en.Grid(8, 2), np.full((8, 8), np.nan))
    with pytest.raises(an.AnalysisError):
        an.mixed_norm(F, an.MixedNormSpec())


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_modulation_norm_of_gaussian(p):
    # |V_phi phi| = exp(-pi |z|^2 / 2), so ||V_phi phi||_p = (2/p)^{1/p}
    phi = en.gaussian(en.Grid(64))
    assert an.modulation_norm(phi, an.MixedNormSpec(p, p)) == pytest.approx(
        (2 / p) ** (1 / p), rel=1e-8)


def test_modulation_norm_zero_window():
    g = en.Grid(16)
    with pytest.raises(an.AnalysisError):
        an.modulation_norm(en.gaussian(g), an.MixedNormSpec(), en.Signal(g, np.zeros(16)))


@given(seed=st.integers(0, 10 ** 6))
def test_l2_norm_is_moyal(seed):
    rng = np.random.default_rng(seed)
    g = en.Grid(16)
    f, h = rand_signal(g, rng), rand_signal(g, rng)
    W = ds.metaplectic_wigner(sp.A_tau(0.5), f, h, path="word")
    assert an.mixed_norm(W, an.MixedNormSpec(2, 2)) == pytest.approx(f.norm() * h.norm(),
                                                                     rel=1e-9)


def test_window_stability_reported_only():
    r = an.window_stability(en.gaussian(en.Grid(32), center=0.3), an.MixedNormSpec(1, 1))
    assert r["asserted"] is False and r["ratio"] >= 1


# ---------------------------------------------------------------- frames

def test_frame_spec_validation():
    g = en.gaussian(en.Grid(16))
    with pytest.raises(an.AnalysisError):
        an.FrameSpec(g, 3, 2)
    with pytest.raises(an.AnalysisError):
        an.FrameSpec(en.gaussian(en.Grid(8, 2)), 2, 2)
    assert an.FrameSpec(g, 2, 2).density == 4


def test_orthonormal_impulse_frame():
    grid = en.Grid(16)
    imp = unit(en.impulse(grid))
    lo, hi = an.frame_bounds(an.FrameSpec(imp, 1, 16))
    assert lo == pytest.approx(1.0, abs=1e-12) and hi == pytest.approx(1.0, abs=1e-12)


def test_gaussian_frame_and_dual(rng):
    grid = en.Grid(16)
    spec = an.FrameSpec(en.gaussian(grid), 2, 2)
    lo, hi = an.frame_bounds(spec)
    assert 0 < lo <= hi
    assert an.frame_reconstruction_error(spec, rand_signal(grid, rng)) < 1e-10


def test_frame_bounds_scale_quadratically():
    grid = en.Grid(16)
    g = en.gaussian(grid)
    lo, hi = an.frame_bounds(an.FrameSpec(g, 2, 2))
    lo2, hi2 = an.frame_bounds(an.FrameSpec(g.replace(2 * g.values), 2, 2))
    assert lo2 == pytest.approx(4 * lo) and hi2 == pytest.approx(4 * hi)


def test_undersampled_lattice_has_no_lower_bound():
    lo, _ = an.frame_bounds(an.FrameSpec(en.gaussian(en.Grid(16)), 4, 8))
    assert lo < 1e-10


def test_frame_operator_hermitian():
    S = an.frame_operator(an.FrameSpec(en.gaussian(en.Grid(16), center=0.2), 2, 4))
    assert np.allclose(S, S.conj().T)


# ------------------------------------------------------------ norm relation

def test_warp_data_needs_right_regular():
    with pytest.raises(sp.PreconditionError):
        an.warp_data(sp.A_tau(0.0))


def test_warped_window_identity():
    g = en.gaussian(en.Grid(32), center=0.1)
    assert np.allclose(an.warped_window(g, np.eye(1)).values, g.values, atol=1e-12)


@pytest.mark.parametrize("A,p", [(sp.A_ST(), 2), (sp.A_tau(0.5), 2), (sp.A_tau(0.3), 1),
                                 (sp.A_tau(0.5), 1)])
def test_norm_relation(A, p):
    r = an.norm_relation_report(A, grid=en.Grid(32), p=p)
    assert r["value"] < 1e-4


def test_norm_ratio_with_weight_is_reported():
    r = an.norm_relation_report(sp.A_tau(0.5), grid=en.Grid(16), p=2, s=1)
    assert r["asserted"] is False


# ------------------------------------------------------------------ Lieb

@pytest.mark.parametrize("p,derived,printed", [(1, 1.0, 2.0), (2, 1.0, 2 ** 0.5),
                                             (4, 2 ** 0.25, 2 ** 0.5)])
def test_lieb_constants_wigner(p, derived, printed):
    c = an.lieb_constants(sp.A_tau(0.5), p)
    assert c.derived_constant == pytest.approx(derived)
    assert c.printed_constant == pytest.approx(printed)


@given(tau=st.floats(0.05, 0.95))
def test_lieb_constant_p2_is_one(tau):
    assert an.lieb_constants(sp.A_tau(tau), 2).derived_constant == pytest.approx(1.0)


def test_lieb_constants_reject_small_p():
    with pytest.raises(an.AnalysisError):
        an.lieb_constants(sp.A_tau(0.5), 0.5)


def test_gaussian_is_extremal():
    phi = en.gaussian(en.Grid(64))
    r = an.lieb_check(sp.A_tau(0.5), phi, phi, 4)
    assert r["value"] == pytest.approx(2 ** 0.25, rel=1e-8)
    assert r["passed"]


@given(seed=st.integers(0, 10 ** 6), p=st.sampled_from([1.0, 1.5, 3.0, 4.0]),
       tau=st.sampled_from([0.3, 0.5]))
def test_lieb_bounds_random(seed, p, tau):
    rng = np.random.default_rng(seed)
    g = en.Grid(32)
    f, h = rand_signal(g, rng), rand_signal(g, rng)
    assert an.lieb_check(sp.A_tau(tau), f, h, p)["passed"]


# ------------------------------------------------------------ uncertainty

def test_superlevel_measure():
    F = ds.Distribution(en.Grid(4, 2), np.ones((4, 4)))
    # each cell carries 1/16 of the energy 16 * cell
    m, k = an.superlevel_measure(F, 0.5 * 16 * F.grid.cell)
    assert k == 8 and m == pytest.approx(8 * F.grid.cell)
    assert an.superlevel_measure(F, 0) == (0.0, 0)


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_weak_uncertainty_gaussian(eps):
    phi = en.gaussian(en.Grid(64))
    r = an.weak_uncertainty(sp.A_tau(0.5), phi, phi, eps)
    assert r["passed"]
    assert {"printed", "min_ratio"} <= set(r["printed_floors"])


def test_weak_uncertainty_validation():
    g = en.Grid(16)
    phi = en.gaussian(g)
    with pytest.raises(an.AnalysisError):
        an.weak_uncertainty(sp.A_tau(0.5), phi.replace(2 * phi.values), phi, 0.1)
    with pytest.raises(an.AnalysisError):
        an.weak_uncertainty(sp.A_tau(0.5), phi, phi, 1.5)
    with pytest.raises(an.AnalysisError):
        an.weak_uncertainty(sp.A_tau(0.5), phi, phi, 0.1, ps=(2,))


def test_support_report_not_asserted():
    phi = en.gaussian(en.Grid(32))
    r = an.support_report(sp.A_tau(0.5), phi, phi)
    assert r["asserted"] is False and 0 < r["value"] <= r["box_measure"]
