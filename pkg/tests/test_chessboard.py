import math

import numpy as np
import pytest

from rp_toolkit.chessboard import (CLASS_MULTIPLICITY, ChessboardError,
                                   PlaquettePattern, all_patterns,
                                   bad_event_bound, conditional_gaussian_stats,
                                   duality_pt, gaussian_domination_bruteforce,
                                   gaussian_pattern_ratio,
                                   gradient_block_determinant, gradient_excess,
                                   pattern_zvalue, peierls_certificate)
from rp_toolkit.torus import TorusSpec

DIAG = PlaquettePattern(((1, -1), (-1, 1)))
STRIPE = PlaquettePattern(((1, 1), (-1, -1)))
THREE_ONE = PlaquettePattern(((1, -1), (1, 1)))
GOOD = PlaquettePattern(((1, 1), (1, 1)))


def test_pattern_classification_counts():
    counts = {}
    for p in all_patterns():
        counts[p.klass] = counts.get(p.klass, 0) + 1
    assert counts == CLASS_MULTIPLICITY


def test_zvalue_closed_forms():
    beta, kappa = 2.0, 3.0
    assert pattern_zvalue(GOOD, beta, kappa) == 1.0
    z_diag = math.exp(-4 * beta * kappa / (8 * beta + kappa))
    z_stripe = math.exp(-2 * beta * kappa / (4 * beta + kappa))
    assert pattern_zvalue(DIAG, beta, kappa) == pytest.approx(z_diag, rel=1e-14)
    assert pattern_zvalue(STRIPE, beta, kappa) == pytest.approx(z_stripe, rel=1e-14)
    # three-one value is the square root of the diagonal one
    assert pattern_zvalue(THREE_ONE, beta, kappa) == pytest.approx(
        math.sqrt(z_diag), rel=1e-14)


@pytest.mark.parametrize("pattern,name", [(DIAG, "diagonal"), (STRIPE, "stripe")])
def test_gaussian_ratio_matches_zvalue_for_eigenvectors(pattern, name):
    # pure Fourier-mode patterns make the dissemination bound an identity
    beta, kappa = 1.5, 2.0
    direct = gaussian_pattern_ratio(pattern, beta, kappa, L=8)
    assert direct == pytest.approx(pattern_zvalue(pattern, beta, kappa), rel=1e-12)


def test_gaussian_ratio_size_independent_for_eigenvectors():
    vals = [gaussian_pattern_ratio(DIAG, 1.0, 1.0, L=L) for L in (4, 8, 12)]
    assert max(vals) - min(vals) < 1e-12


def test_bad_event_bound_combination():
    beta, kappa = 5.0, 7.0
    expect = (2 * pattern_zvalue(DIAG, beta, kappa)
              + 4 * pattern_zvalue(STRIPE, beta, kappa)
              + 8 * pattern_zvalue(THREE_ONE, beta, kappa))
    assert bad_event_bound(beta, kappa) == pytest.approx(expect, rel=1e-14)


def test_peierls_certificate_deep_well():
    cert = peierls_certificate(100.0, 100.0, c=12.0)
    assert cert.verdict is True
    assert cert.margin > 0.2


def test_peierls_certificate_shallow_well():
    cert = peierls_certificate(1.0, 1.0, c=12.0)
    assert cert.verdict is False


def test_peierls_monotone_in_beta_and_kappa():
    betas = [1.0, 4.0, 16.0, 64.0, 256.0]
    kappas = [1.0, 4.0, 16.0, 64.0, 256.0]
    z = np.array([[bad_event_bound(b, k) for k in kappas] for b in betas])
    assert np.all(np.diff(z, axis=0) < 0)
    assert np.all(np.diff(z, axis=1) < 0)


def test_conditional_gaussian_zero_field():
    torus = TorusSpec(d=2, L=4)
    mean, var = conditional_gaussian_stats(np.zeros(torus.N), 2.0, 1.0, torus)
    assert np.allclose(mean, 0.0)
    assert np.all(var > 0)
    # translation invariance: every site has the same conditional variance
    assert var.max() - var.min() < 1e-12


def test_conditional_gaussian_constant_signs():
    # constant sigma makes the gradient term vanish from the mean equation:
    # mean = kappa (kappa I)^{-1} sigma = sigma
    torus = TorusSpec(d=2, L=4)
    mean, _ = conditional_gaussian_stats(np.ones(torus.N), 3.0, 2.0, torus)
    assert np.allclose(mean, 1.0, atol=1e-12)


def test_gaussian_domination_random_fields():
    torus = TorusSpec(d=1, L=4)
    rng = np.random.default_rng(1)
    h = rng.uniform(-1.0, 1.0, size=(8, torus.N))
    cert = gaussian_domination_bruteforce(1.0, 4.0, torus, h)
    assert cert.verdict is True


def test_gaussian_domination_constant_shift_is_equality():
    torus = TorusSpec(d=1, L=4)
    h = np.full((1, torus.N), 0.37)
    cert = gaussian_domination_bruteforce(1.0, 4.0, torus, h)
    assert abs(cert.quantities["worst_ratio"] - 1.0) < 1e-9


def test_gradient_determinant_degenerate_at_equal_stiffness():
    rng = np.random.default_rng(2)
    ks = rng.uniform(-math.pi, math.pi, size=(50, 2))
    kappa = 1.7
    det = gradient_block_determinant(ks, kappa, kappa)
    dhat1 = 2 * (1 - np.cos(ks[:, 0]))
    dhat2 = 2 * (1 - np.cos(ks[:, 1]))
    # at kappa_O = kappa_D the block matrix decouples into two scalar
    # symbols: det Pi = kappa^2 |a_-|^2 |a_+|^2-type product
    expect = (kappa * dhat1 + kappa * dhat2) * \
        (kappa * (2 + 2 * np.cos(ks[:, 0])) + kappa * dhat2)
    assert np.max(np.abs(det - expect)) < 1e-12


def test_gradient_excess_positive_at_large_ratio():
    excess = gradient_excess(100.0, 1.0)
    assert excess == pytest.approx(0.38356715896148996, abs=1e-6)
    assert excess > 0


def test_duality_swap_and_balance():
    assert duality_pt(3.0, 5.0) + duality_pt(5.0, 3.0) == pytest.approx(1.0, abs=1e-15)
    assert duality_pt(4.0, 4.0) == pytest.approx(0.5, abs=1e-15)


def test_invalid_parameters_rejected():
    with pytest.raises(ChessboardError):
        pattern_zvalue(DIAG, -1.0, 1.0)
    with pytest.raises(ChessboardError):
        gaussian_pattern_ratio(DIAG, 1.0, 0.0, L=8)
    with pytest.raises(ChessboardError):
        duality_pt(0.0, 1.0)
    with pytest.raises(ChessboardError):
        PlaquettePattern(((1, 2), (1, 1)))
