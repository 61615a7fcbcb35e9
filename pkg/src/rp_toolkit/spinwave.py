"""Spin-wave free energies F(theta) and their minimizers.

F(theta) = (1/2) int log D_k(theta) dk/(2 pi)^d over [-pi, pi]^d, where
D_k is the quadratic form governing harmonic fluctuations around the
homogeneous state pointing in direction theta.  Three families:

* Compass2D:   D = sin^2(theta) |1-e^{ik_1}|^2 + cos^2(theta) |1-e^{ik_2}|^2
* OneTwenty3D: D = sum_a q_a(theta) |1-e^{ik_a}|^2 with
               q_1 = sin^2(theta), q_{2,3} = sin^2(theta -/+ 120 deg)
* AFM2D(g):    D = |1-e^{i(k_1+k_2)}|^2 + |1-e^{i(k_1-k_2)}|^2
               + g cos(theta) (|1-e^{ik_1}|^2 - |1-e^{ik_2}|^2)

The AFM form satisfies D(theta) = a D(0) + (1-a) D(pi) with
a = (1 + cos theta)/2 exactly, which pins its minima to {0, pi}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .quadrature import QuadratureSpec, ladder_integrate

FAMILIES = ("Compass2D", "OneTwenty3D", "AFM2D")


class SpinWaveError(Exception):
    pass


def _gap2(k):
    """|1 - e^{ik}|^2 = 2(1 - cos k)."""
    return 2.0 * (1.0 - np.cos(k))


@dataclass(frozen=True)
class SpinWaveIntegrand:
    family: str
    theta: float
    gamma: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpinWaveError(f"unknown family {self.family!r}")
        if self.family == "AFM2D":
            if self.gamma is None or not -2.0 < self.gamma < 2.0:
                raise SpinWaveError("AFM2D needs gamma in (-2, 2)")
        elif self.gamma is not None:
            raise SpinWaveError("gamma only applies to AFM2D")

    @property
    def d(self) -> int:
        return 3 if self.family == "OneTwenty3D" else 2

    def dispersion(self, *k):
        th = self.theta
        if self.family == "Compass2D":
            return (math.sin(th) ** 2 * _gap2(k[0])
                    + math.cos(th) ** 2 * _gap2(k[1]))
        if self.family == "OneTwenty3D":
            q = [math.sin(th) ** 2,
                 math.sin(th - 2 * math.pi / 3) ** 2,
                 math.sin(th + 2 * math.pi / 3) ** 2]
            return sum(qa * _gap2(ka) for qa, ka in zip(q, k))
        base = _gap2(k[0] + k[1]) + _gap2(k[0] - k[1])
        return base + self.gamma * math.cos(th) * (_gap2(k[0]) - _gap2(k[1]))


def sw_free_energy(integrand: SpinWaveIntegrand,
                   quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """(F(theta), quadrature error) by the midpoint refinement ladder."""
    if quad is None:
        quad = QuadratureSpec(grid_points_per_axis=256 if integrand.d == 2
                              else 64)

    def f(*grids):
        disp = integrand.dispersion(*grids)
        # the quadratic form degenerates on a null set; half-cell-shifted
        # midpoint nodes never hit it, but guard against underflow anyway
        return np.log(np.maximum(disp, 1e-300))

    val, err = ladder_integrate(f, integrand.d, quad)
    return 0.5 * val, 0.5 * err


def _profile(family, gamma, thetas, quad):
    out = np.empty(len(thetas))
    errs = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        g = gamma if family == "AFM2D" else None
        out[i], errs[i] = sw_free_energy(
            SpinWaveIntegrand(family=family, theta=float(th), gamma=g), quad)
    return out, errs


@dataclass
class ThetaMinima:
    family: str
    gamma: float | None
    minima: list[float]        # refined argmin locations in [0, 2 pi)
    value: float               # common minimal F
    margin: float              # F at midpoints between minima, minus value
    degenerate: bool           # profile flat within tolerance
    quad_error: float


def minimize_over_theta(family: str, gamma: float | None = None,
                        resolution: int = 360,
                        quad: QuadratureSpec | None = None) -> ThetaMinima:
    """Grid scan over one period plus golden-section refinement."""
    if resolution < 360:
        raise SpinWaveError("need at least 360 grid points per period")
    if quad is None:
        quad = QuadratureSpec(
            grid_points_per_axis=128 if family != "OneTwenty3D" else 32)
    thetas = np.linspace(0.0, 2 * math.pi, resolution, endpoint=False)
    phi, errs = _profile(family, gamma, thetas, quad)
    tol = 10.0 * (errs.max() + 1e-14)
    if phi.max() - phi.min() < tol:
        return ThetaMinima(family=family, gamma=gamma, minima=[],
                           value=float(phi.mean()), margin=0.0,
                           degenerate=True, quad_error=float(errs.max()))

    n = len(thetas)
    h = 2 * math.pi / n
    g = gamma if family == "AFM2D" else None

    def F(th):
        return sw_free_energy(
            SpinWaveIntegrand(family=family, theta=float(th) % (2 * math.pi),
                              gamma=g), quad)[0]

    minima = []
    for i in range(n):
        if phi[i] <= phi[(i - 1) % n] and phi[i] <= phi[(i + 1) % n]:
            if phi[i] > phi.min() + tol:
                continue  # only chase global minima
            res = minimize_scalar(
                F, bounds=(thetas[i] - h, thetas[i] + h), method="bounded",
                options={"xatol": 1e-9})
            th = float(res.x) % (2 * math.pi)
            if th > 2 * math.pi - 1e-6:
                th = 0.0
            minima.append(th)
    minima = sorted(minima)
    # merge duplicates produced by adjacent grid points
    merged = []
    for th in minima:
        if not merged or min(abs(th - merged[-1]),
                             2 * math.pi - abs(th - merged[-1])) > 2 * h:
            merged.append(th)
    if len(merged) > 1 and 2 * math.pi - (merged[-1] - merged[0]) < 2 * h:
        merged.pop()
    value = min(F(th) for th in merged)
    mids = [0.5 * (merged[i] + merged[(i + 1) % len(merged)]
                   + (2 * math.pi if i + 1 == len(merged) else 0.0))
            for i in range(len(merged))]
    margin = min(F(m % (2 * math.pi)) for m in mids) - value
    return ThetaMinima(family=family, gamma=gamma, minima=merged,
                       value=value, margin=margin, degenerate=False,
                       quad_error=float(errs.max()))


def afm_linearity_check(gamma: float, k_samples: np.ndarray,
                        theta_samples: np.ndarray) -> float:
    """max |D_k(theta) - a D_k(0) - (1-a) D_k(pi)|, a = (1+cos theta)/2."""
    if not -2.0 < gamma < 2.0:
        raise SpinWaveError("gamma must lie in (-2, 2)")
    k_samples = np.asarray(k_samples, dtype=float)
    worst = 0.0
    d0 = SpinWaveIntegrand("AFM2D", 0.0, gamma)
    dpi = SpinWaveIntegrand("AFM2D", math.pi, gamma)
    for th in np.asarray(theta_samples, dtype=float):
        dth = SpinWaveIntegrand("AFM2D", float(th), gamma)
        a = 0.5 * (1.0 + math.cos(th))
        lhs = dth.dispersion(k_samples[:, 0], k_samples[:, 1])
        rhs = (a * d0.dispersion(k_samples[:, 0], k_samples[:, 1])
               + (1 - a) * dpi.dispersion(k_samples[:, 0], k_samples[:, 1]))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
