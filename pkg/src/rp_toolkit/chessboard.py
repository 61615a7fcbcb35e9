"""Chessboard-estimate certificates for two lattice field models.

Double-well model (extended Hamiltonian
beta H = beta sum_<xy> (phi_x - phi_y)^2 + (kappa/2) sum phi^2
         - kappa sum phi_x sigma_x,  sigma_x in {-1, +1}):
2x2 sign patterns are classified good/diagonal/stripe/three-one; each
bad class has a closed-form per-site z-value, and their weighted sum
feeds a Peierls coexistence certificate.

Gradient model with two-value bond stiffness (kappa_b in {k_O, k_D},
beta H = sum_b (kappa_b/2) eta_b^2): pattern free energies come from
2x2 Fourier block determinants, and the self-dual point p_t satisfies
p_t/(1-p_t) = (k_D/k_O)^{1/4}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureSpec, ladder_integrate
from .sampling.observables import Certificate
from .torus import TorusSpec

PATTERN_CLASSES = ("good", "diagonal", "stripe", "three_one")
CLASS_MULTIPLICITY = {"good": 2, "diagonal": 2, "stripe": 4, "three_one": 8}


class ChessboardError(Exception):
    pass


# ---------------------------------------------------------------------------
# double-well model: plaquette patterns and z-values


@dataclass(frozen=True)
class PlaquettePattern:
    """Signs at the corners of a unit square, indexed [x1][x2]."""
    signs: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        flat = [s for row in self.signs for s in row]
        if len(flat) != 4 or any(s not in (-1, 1) for s in flat):
            raise ChessboardError("pattern must be four signs +-1")

    @property
    def klass(self) -> str:
        flat = [s for row in self.signs for s in row]
        n_minus = flat.count(-1)
        if n_minus in (0, 4):
            return "good"
        if n_minus in (1, 3):
            return "three_one"
        # two minuses: diagonal iff equal signs sit on a diagonal
        if self.signs[0][0] == self.signs[1][1]:
            return "diagonal"
        return "stripe"

    def tile(self, torus: TorusSpec) -> np.ndarray:
        """Period-2 dissemination of the pattern over the torus."""
        if torus.d != 2 or torus.L % 2:
            raise ChessboardError("pattern tiling needs an even 2-d torus")
        x1, x2 = np.meshgrid(np.arange(torus.L) % 2, np.arange(torus.L) % 2,
                             indexing="ij")
        signs = np.asarray(self.signs)
        return signs[x1, x2].astype(float)


def all_patterns() -> list[PlaquettePattern]:
    out = []
    for bits in range(16):
        s = [1 if bits & (1 << j) else -1 for j in range(4)]
        out.append(PlaquettePattern(signs=((s[0], s[1]), (s[2], s[3]))))
    return out


def pattern_zvalue(pattern: PlaquettePattern, beta: float, kappa: float) -> float:
    """Closed-form per-site dissemination bound for the pattern class."""
    if beta <= 0 or kappa <= 0:
        raise ChessboardError("beta and kappa must be positive")
    klass = pattern.klass
    if klass == "good":
        return 1.0
    if klass == "diagonal":
        return math.exp(-4.0 * beta * kappa / (8.0 * beta + kappa))
    if klass == "stripe":
        return math.exp(-2.0 * beta * kappa / (4.0 * beta + kappa))
    return math.exp(-2.0 * beta * kappa / (8.0 * beta + kappa))


def _dhat(torus: TorusSpec) -> np.ndarray:
    """Lattice-Laplacian symbol 2 sum_i (1 - cos k_i) on the grid."""
    ks = [2.0 * math.pi * np.arange(torus.L) / torus.L] * torus.d
    grids = np.meshgrid(*ks, indexing="ij")
    return sum(2.0 * (1.0 - np.cos(g)) for g in grids)


def gaussian_pattern_ratio(pattern: PlaquettePattern, beta: float,
                           kappa: float, L: int) -> float:
    """Exact per-site E(e^{-kappa <phi,sigma>}) / E(e^{-kappa <phi,1>}).

    phi is the massive GFF with covariance (beta Dhat + kappa)^{-1};
    sigma the period-2 tiling of the pattern.  For eigenvector patterns
    (diagonal, stripe) this reproduces the closed-form z-values.
    """
    if kappa <= 0:
        raise ChessboardError("kappa = 0 leaves the zero mode singular")
    if beta <= 0:
        raise ChessboardError("beta must be positive")
    if L % 2 or L > 16:
        raise ChessboardError("L must be even and <= 16")
    torus = TorusSpec(d=2, L=L)
    sigma = pattern.tile(torus)
    denom = beta * _dhat(torus) + kappa
    n = torus.N

    def quad_form(v):
        vhat = np.fft.fftn(v)
        return float(np.sum(np.abs(vhat) ** 2 / denom)) / n

    ones = np.ones_like(sigma)
    exponent = 0.5 * kappa ** 2 * (quad_form(sigma) - quad_form(ones))
    return math.exp(exponent / n)


def bad_event_bound(beta: float, kappa: float) -> float:
    """z(B) <= 2 z_diag + 4 z_stripe + 8 z_threeone."""
    reps = {
        "diagonal": PlaquettePattern(((1, -1), (-1, 1))),
        "stripe": PlaquettePattern(((1, 1), (-1, -1))),
        "three_one": PlaquettePattern(((1, -1), (1, 1))),
    }
    return sum(CLASS_MULTIPLICITY[k] * pattern_zvalue(p, beta, kappa)
               for k, p in reps.items())


def peierls_certificate(beta: float, kappa: float, c: float = 12.0) -> Certificate:
    """Coexistence certificate: PASS iff c z(B) < 1/2, margin 1/4 - 2c z(B)."""
    if c <= 1:
        raise ChessboardError("circuit-counting constant must exceed 1")
    z_bad = bad_event_bound(beta, kappa)
    geometric = c * z_bad
    # sum_{n>=1} (c z)^n <= 2 c z whenever c z <= 1/2
    peierls_sum = geometric / (1.0 - geometric) if geometric < 1 else math.inf
    per_pattern = {
        "diagonal": pattern_zvalue(PlaquettePattern(((1, -1), (-1, 1))), beta, kappa),
        "stripe": pattern_zvalue(PlaquettePattern(((1, 1), (-1, -1))), beta, kappa),
        "three_one": pattern_zvalue(PlaquettePattern(((1, -1), (1, 1))), beta, kappa),
    }
    verdict = geometric < 0.5
    margin = 0.25 - 2.0 * geometric
    return Certificate(
        name="peierls_double_well",
        params={"beta": beta, "kappa": kappa, "c": c},
        quantities={"per_pattern_z": per_pattern, "z_bad": z_bad,
                    "peierls_sum": peierls_sum,
                    "disagreement_bound": 2.0 * geometric},
        verdict=bool(verdict), margin=margin,
    )


# ---------------------------------------------------------------------------
# double-well model: conditional Gaussian law and Gaussian domination


def _bond_list(torus: TorusSpec):
    """Unordered nearest-neighbor bonds with wrap multiplicity."""
    bonds = {}
    for idx in range(torus.N):
        x = torus.site_coords(idx)
        for j in range(torus.d):
            y = list(x)
            y[j] = (y[j] + 1) % torus.L
            jdx = torus.site_index(tuple(y))
            if jdx == idx:
                continue  # L = 1 self-loop contributes no gradient energy
            key = (min(idx, jdx), max(idx, jdx))
            bonds[key] = bonds.get(key, 0) + 1
    return [(i, j, m) for (i, j), m in sorted(bonds.items())]


def _graph_laplacian(torus: TorusSpec) -> np.ndarray:
    lap = np.zeros((torus.N, torus.N))
    for i, j, m in _bond_list(torus):
        lap[i, i] += m
        lap[j, j] += m
        lap[i, j] -= m
        lap[j, i] -= m
    return lap


def conditional_gaussian_stats(sigma: np.ndarray, beta: float, kappa: float,
                               torus: TorusSpec):
    """Conditional law of phi given the signs: N(kappa A^{-1} sigma, A^{-1})
    with A = 2 beta Delta_Q + kappa, Delta_Q the NN gradient quadratic form.
    """
    if kappa <= 0:
        raise ChessboardError("kappa must be positive")
    if torus.N > 4096:
        raise ChessboardError("dense solve limited to N <= 4096")
    sigma = np.asarray(sigma, dtype=float).reshape(torus.N)
    a = 2.0 * beta * _graph_laplacian(torus) + kappa * np.eye(torus.N)
    cov = np.linalg.inv(a)
    mean = kappa * cov @ sigma
    return mean, np.diag(cov).copy()


def gaussian_domination_bruteforce(beta: float, kappa: float,
                                   torus: TorusSpec, h_samples: np.ndarray,
                                   n_nodes: int = 64,
                                   phi_range: float = 4.0) -> Certificate:
    """Direct quadrature check of Z(h) <= Z(0) for the double-well model.

    Z(h) = int prod_x (e^{-(kappa/2) phi_x^2} 2 cosh(kappa phi_x))
           exp(-beta sum_bonds (phi_x - phi_y + h_x - h_y)^2) dphi,
    the sign sum done exactly via the cosh.  N <= 8 sites.
    """
    if torus.N > 8:
        raise ChessboardError("brute-force check limited to N <= 8 sites")
    if n_nodes < 64:
        raise ChessboardError("need at least 64 quadrature nodes per site")
    nodes, wts = np.polynomial.legendre.leggauss(n_nodes)
    phi = phi_range * nodes
    w = phi_range * wts * np.exp(-0.5 * kappa * phi ** 2) * 2 * np.cosh(kappa * phi)
    bonds = _bond_list(torus)

    def partition(h):
        # one tensor index per site; einsum's optimizer exploits the
        # chain/small-cycle structure so the cost stays ~ n_nodes^3
        letters = "abcdefgh"[:torus.N]
        operands, script = [], []
        for idx in range(torus.N):
            operands.append(w)
            script.append(letters[idx])
        for i, j, m in bonds:
            diff = phi[:, None] - phi[None, :] + h[i] - h[j]
            operands.append(np.exp(-beta * m * diff ** 2))
            script.append(letters[i] + letters[j])
        return float(np.einsum(",".join(script) + "->", *operands,
                               optimize=True))

    z0 = partition(np.zeros(torus.N))
    h_samples = np.atleast_2d(np.asarray(h_samples, dtype=float))
    ratios = np.array([partition(h) / z0 for h in h_samples])
    worst = float(ratios.max())
    verdict = worst <= 1.0 + 1e-9
    return Certificate(
        name="gaussian_domination",
        params={"beta": beta, "kappa": kappa, "d": torus.d, "L": torus.L,
                "n_nodes": n_nodes, "phi_range": phi_range},
        quantities={"z0": z0, "worst_ratio": worst,
                    "n_samples": len(h_samples)},
        verdict=bool(verdict), margin=1.0 + 1e-9 - worst,
    )


# ---------------------------------------------------------------------------
# gradient model with two-value bond stiffness


def gradient_block_determinant(k, kappa_o: float, kappa_d: float):
    """det Pi(k) for the three-O/one-D pattern, a_pm = 1 +- e^{ik1} etc."""
    if kappa_o <= 0 or kappa_d <= 0:
        raise ChessboardError("stiffnesses must be positive")
    k = np.asarray(k, dtype=float)
    k1, k2 = k[..., 0], k[..., 1]
    am2 = np.abs(1.0 - np.exp(1j * k1)) ** 2
    ap2 = np.abs(1.0 + np.exp(1j * k1)) ** 2
    bm2 = np.abs(1.0 - np.exp(1j * k2)) ** 2
    diag1 = kappa_o * am2 + 0.5 * (kappa_o + kappa_d) * bm2
    diag2 = kappa_o * ap2 + 0.5 * (kappa_o + kappa_d) * bm2
    off = 0.5 * (kappa_o - kappa_d) * bm2
    return diag1 * diag2 - off ** 2


def gradient_pattern_free_energy(pattern_class: str, kappa_o: float,
                                 kappa_d: float,
                                 quad: QuadratureSpec | None = None) -> float:
    """Per-site Gaussian free energy of the disseminated bond pattern.

    hom_o / hom_d: (1/2) int log(kappa Dhat_2(k)); three_one:
    (1/4) int log det Pi(k), all against dk/(2 pi)^2.
    """
    quad = quad or QuadratureSpec(grid_points_per_axis=256)
    if pattern_class in ("hom_o", "hom_d"):
        kap = kappa_o if pattern_class == "hom_o" else kappa_d
        if kap <= 0:
            raise ChessboardError("stiffness must be positive")

        def f(k1, k2):
            dhat = 2.0 * (1.0 - np.cos(k1)) + 2.0 * (1.0 - np.cos(k2))
            return np.log(np.maximum(kap * dhat, 1e-300))

        val, _ = ladder_integrate(f, 2, quad)
        return 0.5 * val
    if pattern_class != "three_one":
        raise ChessboardError(f"unknown pattern class {pattern_class!r}")

    def f(k1, k2):
        det = gradient_block_determinant(np.stack([k1, k2], axis=-1),
                                         kappa_o, kappa_d)
        return np.log(np.maximum(det, 1e-300))

    val, _ = ladder_integrate(f, 2, quad)
    return 0.25 * val


def gradient_excess(kappa_o: float, kappa_d: float,
                    quad: QuadratureSpec | None = None) -> float:
    """Free-energy excess of the three-O/one-D pattern over the matching
    homogeneous mixture (3/4 ordered + 1/4 disordered bonds)."""
    f_bad = gradient_pattern_free_energy("three_one", kappa_o, kappa_d, quad)
    f_o = gradient_pattern_free_energy("hom_o", kappa_o, kappa_d, quad)
    f_d = gradient_pattern_free_energy("hom_d", kappa_o, kappa_d, quad)
    return f_bad - (0.75 * f_o + 0.25 * f_d)


def duality_pt(kappa_o: float, kappa_d: float) -> float:
    """p_t with p_t/(1-p_t) = (kappa_d/kappa_o)^{1/4}."""
    if kappa_o <= 0 or kappa_d <= 0:
        raise ChessboardError("stiffnesses must be positive")
    odds = (kappa_d / kappa_o) ** 0.25
    return odds / (1.0 + odds)
