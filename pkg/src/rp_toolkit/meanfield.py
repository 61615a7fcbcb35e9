"""Mean-field free energies, their extrema, and admissibility bands.

The free energy is Phi_beta(m) = -(beta/2)|m|^2 - S(m) with S the
Legendre-transform entropy of the single-spin measure.  Potts work uses
two coexisting beta normalizations: the dot-product one (matching the
pair Hamiltonian) and the delta one (matching the Kronecker-delta Potts
Hamiltonian); they are related by beta_dot = beta_delta (q-1)/q.  Every
function states which one it takes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .kernels import KernelSpec, mean_field_error_integral
from .models import tetrahedral_vectors

H_MAX = 60.0  # |h| beyond this the Legendre infimum is treated as -inf


class MeanFieldError(Exception):
    pass


# ---------------------------------------------------------------------------
# single-spin measures


@dataclass(frozen=True)
class SingleSpinMeasure:
    """Either a finite atom list or the uniform measure on S^{n-1}."""
    kind: str                      # "atoms" | "sphere"
    nu: int
    atoms: np.ndarray | None = None
    weights: np.ndarray | None = None
    degree: int = 96               # Gauss-Legendre degree for spheres

    def __post_init__(self):
        if self.kind == "atoms":
            if self.atoms is None or self.weights is None:
                raise MeanFieldError("atom measure needs atoms and weights")
            if abs(self.weights.sum() - 1.0) > 1e-12:
                raise MeanFieldError("weights must sum to 1")
        elif self.kind != "sphere":
            raise MeanFieldError(f"unknown measure kind {self.kind!r}")


def ising_measure() -> SingleSpinMeasure:
    return SingleSpinMeasure(kind="atoms", nu=1,
                             atoms=np.array([[1.0], [-1.0]]),
                             weights=np.array([0.5, 0.5]))


def potts_measure(q: int) -> SingleSpinMeasure:
    v = tetrahedral_vectors(q)
    return SingleSpinMeasure(kind="atoms", nu=q - 1, atoms=v,
                             weights=np.full(q, 1.0 / q))


def sphere_measure(n: int, degree: int = 96) -> SingleSpinMeasure:
    if n == 1:
        return ising_measure()
    if n not in (2, 3):
        raise MeanFieldError("sphere measure implemented for n in {1, 2, 3}")
    return SingleSpinMeasure(kind="sphere", nu=n, degree=degree)


def cumulant_generating(measure: SingleSpinMeasure, h: np.ndarray):
    """G(h) = log E e^{h.S} and its gradient E(S e^{h.S})/E e^{h.S}."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != (measure.nu,):
        raise MeanFieldError(f"h must be a {measure.nu}-vector")
    if measure.kind == "atoms":
        t = measure.atoms @ h
        tmax = t.max()
        w = measure.weights * np.exp(t - tmax)
        z = w.sum()
        g = math.log(z) + tmax
        grad = (w @ measure.atoms) / z
        return g, grad

    # uniform sphere: rotate h onto the first axis, quadrature in the
    # polar angle; by symmetry the gradient points along h
    r = float(np.linalg.norm(h))
    n = measure.nu
    if r == 0.0:
        return 0.0, np.zeros(n)
    nodes, wts = np.polynomial.legendre.leggauss(measure.degree)
    if n == 2:
        theta = math.pi * nodes  # angle in [-pi, pi], weight 1/(2 pi)
        u = np.cos(theta)
        qw = wts * 0.5
    else:
        u = nodes                # u = cos(polar angle), density 1/2 du
        qw = wts * 0.5
    t = r * u
    tmax = t.max()
    e = qw * np.exp(t - tmax)
    z = e.sum()
    g = math.log(z) + tmax
    dg = float(e @ u) / z        # dG/dr
    return g, dg * h / r


def entropy(measure: SingleSpinMeasure, m: np.ndarray) -> float:
    """S(m) = inf_h [G(h) - h.m]; -inf outside the convex hull of Omega."""
    m = np.atleast_1d(np.asarray(m, dtype=float))

    def fun(h):
        g, grad = cumulant_generating(measure, h)
        return g - h @ m, grad - m

    res = minimize(fun, np.zeros(measure.nu), jac=True, method="L-BFGS-B",
                   bounds=[(-H_MAX, H_MAX)] * measure.nu,
                   options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 500})
    h = res.x
    if np.any(np.abs(h) >= H_MAX - 1e-6) and np.linalg.norm(res.jac) > 1e-6:
        return -math.inf  # infimum escapes to infinity: m outside Conv(Omega)
    return float(res.fun)


def free_energy(measure: SingleSpinMeasure, beta: float, m: np.ndarray) -> float:
    """Phi_beta(m) = -(beta/2)|m|^2 - S(m)   (beta in dot normalization)."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    s = entropy(measure, m)
    if s == -math.inf:
        return math.inf
    return -0.5 * beta * float(m @ m) - s


# ---------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True)
class MeanFieldSolution:
    m: np.ndarray
    phi: float
    stable: bool
    converged: bool


def solve_mean_field(measure: SingleSpinMeasure, beta: float,
                     starts: list[np.ndarray] | None = None,
                     damping: float = 0.5, tol: float = 1e-12,
                     max_iter: int = 20000) -> list[MeanFieldSolution]:
    """Damped iteration m <- grad G(beta m), deduplicated at 1e-9."""
    if beta < 0:
        raise MeanFieldError("beta must be >= 0")
    if starts is None:
        starts = _default_starts(measure)
    sols = []
    for m0 in starts:
        m = np.atleast_1d(np.asarray(m0, dtype=float))
        converged = False
        for _ in range(max_iter):
            _, g = cumulant_generating(measure, beta * m)
            m_new = (1.0 - damping) * m + damping * g
            if np.linalg.norm(m_new - m) < tol:
                m = m_new
                converged = True
                break
            m = m_new
        if any(np.linalg.norm(m - s.m) < 1e-9 for s in sols):
            continue
        sols.append(MeanFieldSolution(
            m=m,
            phi=free_energy(measure, beta, m),
            stable=_is_stable(measure, beta, m),
            converged=converged,
        ))
    return sols


def _default_starts(measure):
    starts = [np.zeros(measure.nu)]
    if measure.kind == "atoms":
        for a in measure.atoms:
            for t in (0.25, 0.5, 0.99):
                starts.append(t * a)
    else:
        e1 = np.zeros(measure.nu)
        e1[0] = 1.0
        starts += [t * e1 for t in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)]
    return starts[:11]


def _is_stable(measure, beta, m, eps=1e-6):
    """Spectral radius of the linearized map m -> grad G(beta m) at m."""
    nu = measure.nu
    jac = np.zeros((nu, nu))
    for a in range(nu):
        dm = np.zeros(nu)
        dm[a] = eps
        _, gp = cumulant_generating(measure, beta * (m + dm))
        _, gm = cumulant_generating(measure, beta * (m - dm))
        jac[:, a] = (gp - gm) / (2 * eps)
    return bool(np.max(np.abs(np.linalg.eigvals(jac))) < 1.0)


def axis_bifurcation_beta(measure: SingleSpinMeasure, lo: float, hi: float,
                          tol: float = 1e-8) -> float:
    """Smallest beta (dot units) with a nonzero fixed point on the first axis.

    Bisection on the existence of m > 0 with m = |grad G(beta m e_1)|.
    """
    e1 = np.zeros(measure.nu)
    e1[0] = 1.0
    # a nonzero fixed point exists iff g(m) = gradG(beta m e1).e1 - m is
    # positive somewhere on (0, 1]; scanning g avoids the critically slow
    # iteration right at the bifurcation
    ms = np.concatenate([np.geomspace(1e-5, 0.1, 80),
                         np.linspace(0.1, 1.0, 120)])

    def has_nonzero(beta):
        for m in ms:
            _, g = cumulant_generating(measure, beta * m * e1)
            if g[0] - m > 1e-12:
                return True
        return False

    if has_nonzero(lo) or not has_nonzero(hi):
        raise MeanFieldError("bifurcation bracket failure")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_nonzero(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# profiles


@dataclass
class FreeEnergyProfile:
    grid: np.ndarray
    phi: np.ndarray
    minima: list[int] = field(default_factory=list)
    maxima: list[int] = field(default_factory=list)
    global_min: int = 0

    @classmethod
    def from_values(cls, grid, phi):
        grid = np.asarray(grid, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if np.any(np.diff(grid) <= 0):
            raise MeanFieldError("profile grid must be strictly increasing")
        minima, maxima = [], []
        for i in range(1, len(grid) - 1):
            if phi[i] <= phi[i - 1] and phi[i] <= phi[i + 1]:
                d2 = phi[i - 1] - 2 * phi[i] + phi[i + 1]
                if d2 > 0:
                    minima.append(i)
            if phi[i] >= phi[i - 1] and phi[i] >= phi[i + 1]:
                d2 = phi[i - 1] - 2 * phi[i] + phi[i + 1]
                if d2 < 0:
                    maxima.append(i)
        return cls(grid=grid, phi=phi, minima=minima, maxima=maxima,
                   global_min=int(np.argmin(phi)))


def beta_dot_from_delta(q: int, beta_delta: float) -> float:
    return beta_delta * (q - 1) / q


def beta_delta_from_dot(q: int, beta_dot: float) -> float:
    return beta_dot * q / (q - 1)


def potts_on_axis_value(q: int, beta_delta: float, m: float) -> float:
    """Phi(m) via mole fractions x_1 = (1+(q-1)m)/q, x_k = (1-m)/q.

    beta in the delta normalization.  Valid for m in [-1/(q-1), 1].
    """
    if not -1.0 / (q - 1) - 1e-12 <= m <= 1.0 + 1e-12:
        raise MeanFieldError("on-axis magnetization out of range")
    x1 = (1.0 + (q - 1) * m) / q
    xk = (1.0 - m) / q
    def xlogx(x):
        return 0.0 if x <= 0.0 else x * math.log(x)
    phi = -0.5 * beta_delta * (x1 * x1 + (q - 1) * xk * xk)
    phi += xlogx(x1) + (q - 1) * xlogx(xk)
    return phi


def potts_on_axis_profile(q: int, beta_delta: float,
                          grid: np.ndarray) -> FreeEnergyProfile:
    if beta_delta < 0:
        raise MeanFieldError("beta must be >= 0")
    grid = np.asarray(grid, dtype=float)
    phi = np.array([potts_on_axis_value(q, beta_delta, m) for m in grid])
    return FreeEnergyProfile.from_values(grid, phi)


def _interior_min(q, beta_delta, lo=0.02):
    """Location/value of the best interior minimum with m >= lo, or None."""
    res = minimize_scalar(lambda m: potts_on_axis_value(q, beta_delta, m),
                          bounds=(lo, 1.0 - 1e-12), method="bounded",
                          options={"xatol": 1e-13})
    m = float(res.x)
    # reject when the minimizer just slid to the boundary of the bracket
    if m <= lo * 1.05:
        return None
    return m, float(res.fun)


def locate_transition(q: int, tol: float = 1e-10):
    """(beta_0 spinodal, beta_t first-order point), delta normalization.

    beta_0: smallest beta with an interior local minimum at m > 0;
    beta_t: beta at which that minimum ties with m = 0.  For q = 2 both
    collapse to the continuous bifurcation point beta_delta = 2.
    """
    if q < 2:
        raise MeanFieldError("q must be >= 2")
    if q == 2:
        b = axis_bifurcation_beta(ising_measure(), 0.5, 2.0)
        return beta_delta_from_dot(2, b), beta_delta_from_dot(2, b)

    def has_interior_min(beta):
        got = _interior_min(q, beta)
        if got is None:
            return False
        m, val = got
        # a genuine local min is strictly below the nearby profile
        return (potts_on_axis_value(q, beta, m - 1e-4) > val
                and potts_on_axis_value(q, beta, min(1.0, m + 1e-4)) > val)

    # bracket around the degenerate-minima point, where the interior
    # minimum is well separated from both endpoints of the m interval
    bt_guess = 2.0 * (q - 1) * math.log(q - 1) / (q - 2)
    lo, hi = 1.0, bt_guess + 0.25
    if has_interior_min(lo) or not has_interior_min(hi):
        raise MeanFieldError("spinodal bracket failure")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_interior_min(mid):
            hi = mid
        else:
            lo = mid
    beta0 = 0.5 * (lo + hi)

    def gap(beta):
        got = _interior_min(q, beta)
        if got is None:
            return -1.0
        _, val = got
        return potts_on_axis_value(q, beta, 0.0) - val

    lo, hi = beta0 + 1e-7, bt_guess + 0.25
    if gap(lo) > 0 or gap(hi) < 0:
        raise MeanFieldError("transition bracket failure")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    beta_t = 0.5 * (lo + hi)
    if not beta_t > beta0:
        raise MeanFieldError("expected beta_t > beta_0")
    return beta0, beta_t


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibleBand:
    beta: float                # dot normalization
    band: float                # nu beta I_d / 2
    grid: np.ndarray
    phi: np.ndarray
    admissible: np.ndarray     # boolean mask
    components: list[tuple[int, int]]  # index ranges of connected runs

    @property
    def disconnected(self) -> bool:
        return len(self.components) > 1


def _components(mask: np.ndarray):
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def admissible_band(measure: SingleSpinMeasure, kernel: KernelSpec,
                    beta: float, grid: np.ndarray,
                    phi: np.ndarray | None = None,
                    i_d: float | None = None, quad=None) -> AdmissibleBand:
    """Grid magnetizations with Phi <= inf Phi + (nu beta / 2) I_d.

    beta in dot normalization; the profile, if not supplied, is Phi along
    the first-axis direction.
    """
    if i_d is None:
        res = mean_field_error_integral(kernel, quad)
        if not res.transient:
            raise MeanFieldError("admissibility band needs a transient kernel")
        i_d = res.value
    band = 0.5 * measure.nu * beta * i_d
    grid = np.asarray(grid, dtype=float)
    if phi is None:
        e1 = np.zeros(measure.nu)
        e1[0] = 1.0
        phi = np.array([free_energy(measure, beta, m * e1) for m in grid])
    mask = phi <= phi.min() + band
    return AdmissibleBand(beta=beta, band=band, grid=grid, phi=phi,
                          admissible=mask, components=_components(mask))


def forced_discontinuity_check(q: int, kernel: KernelSpec,
                               resolution: float = 1e-3,
                               n_beta: int = 41, n_grid: int = 1201,
                               quad=None, i_d: float | None = None):
    """PASS iff some beta has a disconnected admissible set on the m-axis.

    Scans the on-axis interval m in [0, 1] only: the symmetric copies of
    a minimizer under the Potts permutation group would otherwise make
    the set trivially disconnected for every ordered phase.  Returns a
    (verdict, details) pair.
    """
    from .sampling.observables import Certificate

    if i_d is None:
        res = mean_field_error_integral(kernel, quad)
        if not res.transient:
            raise MeanFieldError("forced discontinuity check needs transience")
        i_d = res.value
    nu = q - 1

    if q == 2:
        return Certificate(
            name="forced_discontinuity",
            params={"q": q, "I_d": i_d},
            quantities={"reason": "continuous transition: no free-energy hump"},
            verdict=False, margin=0.0,
        )

    beta0, beta_t = locate_transition(q)
    grid = np.linspace(0.0, 1.0 - 1e-9, n_grid)
    best_gap = 0.0
    best_beta = None
    for beta_delta in np.linspace(beta0, beta_t + (beta_t - beta0), n_beta):
        beta_dot = beta_dot_from_delta(q, beta_delta)
        phi = np.array([potts_on_axis_value(q, beta_delta, m) for m in grid])
        band = 0.5 * nu * beta_dot * i_d
        mask = phi <= phi.min() + band
        comps = _components(mask)
        if len(comps) > 1:
            gap = max(
                grid[comps[i + 1][0]] - grid[comps[i][1]]
                for i in range(len(comps) - 1)
            )
            if gap > best_gap:
                best_gap, best_beta = gap, beta_delta
    verdict = best_gap >= resolution
    return Certificate(
        name="forced_discontinuity",
        params={"q": q, "I_d": i_d, "resolution": resolution},
        quantities={"best_gap": best_gap, "beta_delta": best_beta,
                    "beta_0": beta0, "beta_t": beta_t},
        verdict=bool(verdict), margin=best_gap - resolution,
    )
