"""Geometry and index arithmetic for the periodic lattice (Z/LZ)^d.

Sites are linearized row-major in coordinate order so that every CSV
emitted downstream is bit-reproducible.  Reciprocal-grid components are
stored in [0, 2*pi); ``to_signed`` maps them into (-pi, pi] for the
quadrature modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


@dataclass(frozen=True)
class TorusSpec:
    """A d-dimensional torus with even side length L."""

    d: int
    L: int
    N: int = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.L < 2 or self.L % 2 != 0:
            raise ValueError("side length must be even and >= 2")
        object.__setattr__(self, "N", self.L**self.d)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    def site_index(self, coords) -> int:
        """Row-major linear index of a (wrapped) site."""
        idx = 0
        for c in coords:
            idx = idx * self.L + (c % self.L)
        return idx

    def site_coords(self, index: int) -> tuple[int, ...]:
        coords = []
        for _ in range(self.d):
            coords.append(index % self.L)
            index //= self.L
        return tuple(reversed(coords))


def wrap(site, torus: TorusSpec) -> tuple[int, ...]:
    """Reduce each coordinate mod L into [0, L)."""
    if len(site) != torus.d:
        raise ValueError(f"expected {torus.d} coordinates, got {len(site)}")
    return tuple(int(c) % torus.L for c in site)


def torus_displacement(x, y, torus: TorusSpec) -> tuple[int, ...]:
    """Componentwise (y - x) mod L."""
    xw, yw = wrap(x, torus), wrap(y, torus)
    return tuple((b - a) % torus.L for a, b in zip(xw, yw))


def reciprocal_grid(torus: TorusSpec) -> np.ndarray:
    """All L^d reciprocal vectors 2*pi*n/L, zero mode first.

    Returned as an (N, d) array ordered row-major in n, which puts the
    zero mode at row 0.
    """
    ns = np.array(list(product(range(torus.L), repeat=torus.d)), dtype=float)
    return 2.0 * np.pi * ns / torus.L


def to_signed(k: np.ndarray) -> np.ndarray:
    """Map reciprocal components from [0, 2*pi) to (-pi, pi]."""
    k = np.asarray(k, dtype=float)
    return np.where(k > np.pi, k - 2.0 * np.pi, k)


def all_sites(torus: TorusSpec) -> np.ndarray:
    """(N, d) integer array of site coordinates in row-major order."""
    return np.array(list(product(range(torus.L), repeat=torus.d)), dtype=np.int64)


def neighbor_table(torus: TorusSpec, displacements, weights=None):
    """Linear-index lookup table for a set of displacement vectors.

    Returns an (N, m) int32 array whose row x lists the linear indices of
    x + v for each displacement v.  Used to bind coupling values to a
    concrete lattice for the samplers.
    """
    sites = all_sites(torus)
    disp = np.asarray(displacements, dtype=np.int64)
    table = np.empty((torus.N, len(disp)), dtype=np.int32)
    L = torus.L
    strides = np.array([L ** (torus.d - 1 - j) for j in range(torus.d)], dtype=np.int64)
    for j, v in enumerate(disp):
        shifted = (sites + v) % L
        table[:, j] = shifted @ strides
    return table
