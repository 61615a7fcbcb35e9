"""Spin spaces, a priori measures, and torus Hamiltonians.

Families covered: Ising, q-state Potts (tetrahedral embedding), O(n),
liquid crystal (Q-matrix trace interaction), massive GFF, double-well
scalar field, two-kappa gradient model, orbital compass, 120-degree
model, and the nearest/next-nearest-neighbor antiferromagnet.

Pair-interaction energies follow H = -(1/2) sum_{x,y} J_xy S_x . S_y over
ordered pairs; the equivalent gradient form (+1/2 sum over unordered
pairs of J |S_x - S_y|^2) differs by a configuration-independent constant
for fixed-norm spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import CouplingMatrix
from .torus import TorusSpec


class ModelError(Exception):
    pass


_FAMILIES = {
    "Ising", "Potts", "O_n", "LiquidCrystal", "GFF", "GaussianDoubleWell",
    "GradientTwoKappa", "OrbitalCompass", "OneTwenty", "NNNAntiferromagnet",
}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    q: int | None = None            # Potts
    n: int | None = None            # O_n / LiquidCrystal
    kappa: float | None = None      # GFF mass / double-well curvature
    kappa_o: float | None = None    # gradient model
    kappa_d: float | None = None
    p: float | None = None
    compass_d: int | None = None    # orbital compass lattice dimension
    gamma: float | None = None      # AFM nn coupling

    def __post_init__(self):
        f = self.family
        if f not in _FAMILIES:
            raise ModelError(f"unknown family {f!r}")
        if f == "Potts" and (self.q is None or self.q < 2):
            raise ModelError("Potts requires q >= 2")
        if f in ("O_n", "LiquidCrystal") and (self.n is None or self.n < 1):
            raise ModelError(f"{f} requires n >= 1")
        if f == "LiquidCrystal" and self.n < 2:
            raise ModelError("LiquidCrystal requires n >= 2")
        if f == "GFF" and (self.kappa is None or self.kappa < 0):
            raise ModelError("GFF requires mass kappa >= 0")
        if f == "GaussianDoubleWell" and (self.kappa is None or self.kappa <= 0):
            raise ModelError("double well requires kappa > 0")
        if f == "GradientTwoKappa":
            if self.kappa_o is None or self.kappa_d is None or self.p is None:
                raise ModelError("gradient model requires kappa_o, kappa_d, p")
            if self.kappa_o <= 0 or self.kappa_d <= 0 or not 0 <= self.p <= 1:
                raise ModelError("gradient model: kappas > 0 and p in [0,1]")
        if f == "OrbitalCompass" and self.compass_d not in (2, 3):
            raise ModelError("orbital compass requires d in {2, 3}")
        if f == "NNNAntiferromagnet":
            if self.gamma is None or abs(self.gamma) >= 2:
                raise ModelError("antiferromagnet requires |gamma| < 2")

    @property
    def nu(self) -> int:
        """Spin-vector dimension."""
        f = self.family
        if f == "Ising":
            return 1
        if f == "Potts":
            return self.q - 1
        if f in ("O_n", "LiquidCrystal"):
            return self.n
        if f in ("GFF", "GaussianDoubleWell", "GradientTwoKappa"):
            return 1
        if f == "OrbitalCompass":
            return self.compass_d
        if f in ("OneTwenty", "NNNAntiferromagnet"):
            return 2
        raise AssertionError(f)

    @property
    def unit_spins(self) -> bool:
        return self.family in (
            "Ising", "Potts", "O_n", "LiquidCrystal",
            "OrbitalCompass", "OneTwenty", "NNNAntiferromagnet",
        )


@dataclass
class SpinConfiguration:
    torus: TorusSpec
    model: ModelSpec
    values: np.ndarray  # (N,) int labels for Potts, (N,) floats for scalar
                        # fields, (N, nu) unit vectors otherwise

    def validate(self, tol: float = 1e-12):
        N = self.torus.N
        f = self.model.family
        if f == "Potts":
            if self.values.shape != (N,) or self.values.dtype.kind not in "iu":
                raise ModelError("Potts configuration must be integer labels")
            if self.values.min() < 1 or self.values.max() > self.model.q:
                raise ModelError("Potts labels out of range")
        elif f in ("Ising", "GFF", "GaussianDoubleWell", "GradientTwoKappa"):
            if self.values.shape != (N,):
                raise ModelError(f"{f} configuration must have shape ({N},)")
            if f == "Ising" and not np.all(np.abs(np.abs(self.values) - 1) < tol):
                raise ModelError("Ising spins must be +-1")
            if not np.all(np.isfinite(self.values)):
                raise ModelError("non-finite field values")
        else:
            nu = self.model.nu
            if self.values.shape != (N, nu):
                raise ModelError(f"expected shape ({N}, {nu})")
            norms = np.linalg.norm(self.values, axis=1)
            if not np.all(np.abs(norms - 1.0) < 1e-10):
                raise ModelError("spins must be unit vectors")
        return self

    def as_vectors(self) -> np.ndarray:
        """Configuration as an (N, nu) float array, embedding Potts labels."""
        f = self.model.family
        if f == "Potts":
            return tetrahedral_vectors(self.model.q)[self.values - 1]
        if self.values.ndim == 1:
            return self.values[:, None].astype(float)
        return self.values


# ---------------------------------------------------------------------------
# algebraic representations


def tetrahedral_vectors(q: int) -> np.ndarray:
    """q unit vectors in R^{q-1} with pairwise dot products -1/(q-1).

    Built by the standard simplex recursion: the first vector is e_1 and
    the rest are (-1/(q-1), sqrt(1 - 1/(q-1)^2) * (vectors for q-1)).
    """
    if q < 2:
        raise ModelError("q must be >= 2")
    if q == 2:
        return np.array([[1.0], [-1.0]])
    sub = tetrahedral_vectors(q - 1)
    c = 1.0 / (q - 1)
    r = math.sqrt(1.0 - c * c)
    out = np.zeros((q, q - 1))
    out[0, 0] = 1.0
    out[1:, 0] = -c
    out[1:, 1:] = r * sub
    return out


def potts_dot(a: int, b: int, q: int) -> float:
    """Dot product of tetrahedral vectors: q/(q-1)*delta_{ab} - 1/(q-1)."""
    if not (1 <= a <= q and 1 <= b <= q):
        raise ModelError("Potts labels must lie in {1,...,q}")
    return (q * (a == b) - 1.0) / (q - 1)


def qmatrix_trace(s: np.ndarray, t: np.ndarray, n: int) -> float:
    """Tr(Q Qtilde) for Q_{ab} = S^a S^b - delta_{ab}/n; equals (S.T)^2 - 1/n."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if s.shape != (n,) or t.shape != (n,):
        raise ModelError(f"expected vectors in R^{n}")
    if abs(np.dot(s, s) - 1.0) > 1e-10 or abs(np.dot(t, t) - 1.0) > 1e-10:
        raise ModelError("Q-matrix trace requires unit vectors")
    qs = np.outer(s, s) - np.eye(n) / n
    qt = np.outer(t, t) - np.eye(n) / n
    return float(np.trace(qs @ qt))


def double_well_potential(phi, kappa: float):
    """V(phi) = -log(e^{-kappa(phi-1)^2/2} + e^{-kappa(phi+1)^2/2})."""
    if kappa <= 0:
        raise ModelError("kappa must be positive")
    phi = np.asarray(phi, dtype=float)
    a = -0.5 * kappa * (phi - 1.0) ** 2
    b = -0.5 * kappa * (phi + 1.0) ** 2
    out = -np.logaddexp(a, b)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# torus Hamiltonians


def torus_hamiltonian(model: ModelSpec, couplings: CouplingMatrix,
                      config: SpinConfiguration, form: str = "dot") -> float:
    """H_L(S) for pair-interaction families.

    form="dot":      H = -(1/2) sum over ordered pairs of J_xy S_x . S_y
    form="gradient": H = +(1/2) sum over unordered pairs of J |S_x - S_y|^2

    The two differ by (1/2) sum_{x,y} J_xy |S|^2 for fixed-norm spins.
    Implemented in Fourier space, which handles full coupling matrices at
    N log N cost.  Liquid-crystal configurations interact through
    Tr(Q_x Q_y) = (S_x.S_y)^2 - 1/n instead of the plain dot product.
    """
    if form not in ("dot", "gradient"):
        raise ModelError(f"unknown Hamiltonian form {form!r}")
    if config.torus != couplings.torus:
        raise ModelError("configuration and couplings live on different tori")
    if model.family in ("OrbitalCompass", "OneTwenty", "NNNAntiferromagnet"):
        raise ModelError("use specialized_hamiltonian for this family")
    config.validate()

    torus = config.torus
    jhat = couplings.fourier_on_grid()

    if model.family == "LiquidCrystal":
        # Tr(QQ~) via the rank-one expansion: pair energy decomposes into
        # products of component pairs S^a S^b, so FFT each of them
        vec = config.values
        n = model.n
        dot_sum = 0.0
        for a in range(n):
            for b in range(n):
                comp = (vec[:, a] * vec[:, b]).reshape(torus.shape)
                ft = np.fft.fftn(comp)
                dot_sum += float(np.sum(jhat * np.abs(ft) ** 2)) / torus.N
        # subtract the constant -1/n piece: sum_{x,y} J_xy * (1/n)
        dot_sum -= couplings.row_sum() * torus.N / n
        energy = -0.5 * dot_sum
        if form == "gradient":
            # |Q_x - Q_y|^2 analogue: shift by the fixed norm Tr(Q^2) = 1 - 1/n
            energy += 0.5 * couplings.row_sum() * torus.N * (1.0 - 1.0 / n)
        return energy

    vec = config.as_vectors()
    dot_sum = 0.0
    for a in range(vec.shape[1]):
        comp = vec[:, a].reshape(torus.shape)
        ft = np.fft.fftn(comp)
        dot_sum += float(np.sum(jhat * np.abs(ft) ** 2)) / torus.N
    energy = -0.5 * dot_sum

    if model.family == "GFF":
        # gradient part plus mass term; the dot form is not normalizable
        energy += 0.5 * couplings.row_sum() * float(np.sum(vec**2))
        energy += 0.5 * model.kappa * float(np.sum(vec**2))
        return energy
    if model.family == "GaussianDoubleWell":
        energy += 0.5 * couplings.row_sum() * float(np.sum(vec**2))
        energy += float(np.sum(double_well_potential(vec[:, 0], model.kappa)))
        return energy

    if form == "gradient":
        energy += 0.5 * couplings.row_sum() * float(np.sum(vec**2))
    return energy


def _axis_roll(lattice: np.ndarray, axis: int) -> np.ndarray:
    """Periodic shift by -1 along a lattice axis of a (..., components) array."""
    return np.roll(lattice, -1, axis=axis)


def specialized_hamiltonian(model: ModelSpec, config: SpinConfiguration) -> float:
    """Energies for the compass, 120-degree and n.n./n.n.n. AFM families."""
    config.validate()
    torus = config.torus
    f = model.family

    if f == "OrbitalCompass":
        d = model.compass_d
        if torus.d != d:
            raise ModelError("compass model dimension mismatch")
        lat = config.values.reshape(torus.shape + (d,))
        h = 0.0
        for alpha in range(d):
            comp = lat[..., alpha]
            h += float(np.sum((comp - np.roll(comp, -1, axis=alpha)) ** 2))
        return h

    if f == "OneTwenty":
        if torus.d != 3:
            raise ModelError("120-degree model lives in d=3")
        lat = config.values.reshape(torus.shape + (2,))
        h = 0.0
        for alpha, ang in enumerate((0.0, 2 * np.pi / 3, 4 * np.pi / 3)):
            b = np.array([np.cos(ang), np.sin(ang)])
            proj = lat @ b
            h += float(np.sum((proj - np.roll(proj, -1, axis=alpha)) ** 2))
        return h

    if f == "NNNAntiferromagnet":
        if torus.d != 2:
            raise ModelError("n.n.n. antiferromagnet lives in d=2")
        lat = config.values.reshape(torus.shape + (2,))
        dots = lambda a: float(np.sum(lat * a))
        nn = dots(np.roll(lat, -1, axis=0)) + dots(np.roll(lat, -1, axis=1))
        nnn = dots(np.roll(np.roll(lat, -1, axis=0), -1, axis=1)) \
            + dots(np.roll(np.roll(lat, -1, axis=0), +1, axis=1))
        return model.gamma * nn + nnn

    raise ModelError(f"{f} has no specialized Hamiltonian")


# ---------------------------------------------------------------------------
# a priori sampling (used for chain initialization and beta=0 tests)


def random_configuration(model: ModelSpec, torus: TorusSpec,
                         rng: np.random.Generator) -> SpinConfiguration:
    f = model.family
    N = torus.N
    if f == "Ising":
        vals = rng.choice([-1.0, 1.0], size=N)
    elif f == "Potts":
        vals = rng.integers(1, model.q + 1, size=N)
    elif f in ("GFF", "GaussianDoubleWell", "GradientTwoKappa"):
        vals = rng.standard_normal(N)
    else:
        nu = model.nu
        g = rng.standard_normal((N, nu))
        vals = g / np.linalg.norm(g, axis=1, keepdims=True)
    return SpinConfiguration(torus=torus, model=model, values=vals)
