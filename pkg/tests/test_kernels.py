import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rp_toolkit.kernels import (KernelError, Mixture, NearestNeighbor,
                                PowerLaw, Yukawa, harmonic_escape_profile,
                                mean_field_error_integral, periodize,
                                simulate_walk_returns, torus_greens,
                                transience_integral)
from rp_toolkit.quadrature import QuadratureSpec
from rp_toolkit.torus import TorusSpec

WATSON_D3 = 1.5163860591519780  # d=3 NN lattice Green's function at 0


@pytest.mark.parametrize("kernel", [
    NearestNeighbor(2), NearestNeighbor(3), Yukawa(2, 1.0), Yukawa(3, 0.5),
    PowerLaw(1, 1.5), PowerLaw(2, 4.0),
])
def test_step_law_normalized(kernel):
    disp, w = kernel.support(mass_tol=1e-12)
    assert abs(w.sum() - 1.0) < 1e-9
    assert np.all(w > 0)
    # J_{00} = 0 everywhere
    zero = np.zeros((1, kernel.d), dtype=np.int64)
    assert kernel.j_values(zero)[0] == 0.0


@pytest.mark.parametrize("kernel", [
    NearestNeighbor(2), Yukawa(2, 0.7), PowerLaw(1, 2.5),
])
def test_fourier_matches_direct_sum(kernel):
    disp, w = kernel.support(mass_tol=1e-14)
    rng = np.random.default_rng(5)
    ks = rng.uniform(-math.pi, math.pi, size=(10, kernel.d))
    direct = np.array([
        float(np.sum(kernel.j_values(disp) * np.cos(disp @ k))) for k in ks
    ])
    assert np.allclose(kernel.fourier(ks), direct, atol=1e-8)


def test_fourier_bounds():
    for kernel in (NearestNeighbor(3), Yukawa(3, 1.0)):
        assert abs(kernel.fourier(np.zeros((1, 3)))[0] - 1.0) < 1e-12
        rng = np.random.default_rng(0)
        ks = rng.uniform(-math.pi, math.pi, size=(50, 3))
        assert np.all(kernel.fourier(ks) <= 1.0 + 1e-12)


def test_transience_verdicts():
    assert not transience_integral(NearestNeighbor(1)).transient
    assert not transience_integral(NearestNeighbor(2)).transient
    res = transience_integral(NearestNeighbor(3))
    assert res.transient
    assert abs(res.value - WATSON_D3) < 1e-3 * WATSON_D3


def test_power_law_d1_transient_for_small_s():
    # step law ~ |x|^{-1.5} has infinite variance: the walk is transient
    # even in one dimension
    res = transience_integral(PowerLaw(1, 1.5))
    assert res.transient
    assert res.value > 0


def test_identity_mean_field_integral():
    # I_d = T_d - 1 exactly when J_00 = 0
    for kernel in (NearestNeighbor(3), Yukawa(3, 1.0)):
        t = transience_integral(kernel)
        i = mean_field_error_integral(kernel)
        assert abs(i.value - (t.value - 1.0)) < 1e-8


def test_mixture_normalization_and_fourier():
    mix = Mixture([(0.25, NearestNeighbor(3)), (0.75, Yukawa(3, 1.0))])
    disp, w = mix.support()
    assert abs(w.sum() - 1.0) < 1e-9
    k = np.array([[0.3, -1.2, 2.0]])
    expect = 0.25 * NearestNeighbor(3).fourier(k) + 0.75 * Yukawa(3, 1.0).fourier(k)
    assert abs(mix.fourier(k)[0] - expect[0]) < 1e-12
    with pytest.raises(ValueError):
        Mixture([(0.5, NearestNeighbor(3)), (0.4, Yukawa(3, 1.0))])


def test_periodized_aliasing_identity():
    # FFT of the wrapped couplings equals the infinite-volume transform
    # at reciprocal vectors
    torus = TorusSpec(d=2, L=6)
    kernel = Yukawa(2, 1.0)
    mat = periodize(kernel, torus)
    from rp_toolkit.torus import reciprocal_grid
    jhat_closed = kernel.fourier(reciprocal_grid(torus)).reshape(torus.shape)
    assert np.max(np.abs(mat.fourier_on_grid() - jhat_closed)) < 1e-12
    assert mat.truncation_error < 1e-12


def test_greens_basic_properties():
    torus = TorusSpec(d=3, L=4)
    kernel = NearestNeighbor(3)
    g00 = torus_greens(torus, kernel)
    g11 = torus_greens(torus, kernel, (0, 0, 0), (1, 0, 0))
    assert g00 > g11 > 0
    # symmetry under translation
    g_shift = torus_greens(torus, kernel, (1, 2, 3), (2, 2, 3))
    assert abs(g11 - g_shift) < 1e-12


def test_greens_gap_decreases():
    kernel = NearestNeighbor(3)
    gaps = [abs(torus_greens(TorusSpec(d=3, L=L), kernel) - WATSON_D3)
            for L in (4, 8, 16)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_escape_profile_closed_form_d1():
    kernel = NearestNeighbor(1)
    for R, alpha in ((5, 1.0), (12, 0.7)):
        prof = harmonic_escape_profile(kernel, R=R, alpha=alpha)
        assert abs(prof.dirichlet_form - alpha**2 / (R + 1)) < 1e-10


def test_escape_profile_d3_limit():
    prof = harmonic_escape_profile(NearestNeighbor(3), R=20, alpha=1.0)
    assert abs(prof.dirichlet_form - 1.0 / WATSON_D3) < 0.02 / WATSON_D3


def test_walk_returns_match_integral():
    # expected visits to the origin = transience integral (visit at time
    # 0 included); finite horizon only biases the estimate downward
    kernel = NearestNeighbor(3)
    est, se = simulate_walk_returns(kernel, steps=1500, walks=3000, seed=11)
    assert abs(est - WATSON_D3) < 4.0 * se + 0.02


def test_degenerate_parameters_rejected():
    with pytest.raises(ValueError):
        Yukawa(3, 0.0)
    with pytest.raises((ValueError, KernelError)):
        PowerLaw(1, 0.9)
