"""Pure-Python sweep kernels; reference implementation of the compiled ones.

Every kernel consumes pre-generated random arrays in site order so that
the compiled and interpreted backends produce bit-identical chains from
the same generator stream.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def ising_heatbath_sweep(spins: np.ndarray, nbr: np.ndarray, w: np.ndarray,
                         beta: float, u: np.ndarray) -> None:
    """One sequential heat-bath sweep over Ising spins (in place).

    spins: (N,) float64 of +-1; nbr: (N, m) neighbor indices; w: (m,)
    coupling weights; u: (N,) uniforms, one per site.
    """
    N, m = nbr.shape
    for i in range(N):
        h = 0.0
        row = nbr[i]
        for j in range(m):
            h += w[j] * spins[row[j]]
        p = 1.0 / (1.0 + math.exp(-2.0 * beta * h))
        spins[i] = 1.0 if u[i] < p else -1.0


def potts_heatbath_sweep(labels: np.ndarray, nbr: np.ndarray, w: np.ndarray,
                         beta: float, dot: np.ndarray, u: np.ndarray) -> None:
    """One heat-bath sweep over 0-based Potts labels (in place).

    dot is the q x q matrix of tetrahedral dot products.
    """
    N, m = nbr.shape
    q = dot.shape[0]
    wk = np.empty(q)
    for i in range(N):
        row = nbr[i]
        for k in range(q):
            e = 0.0
            for j in range(m):
                e += w[j] * dot[k, labels[row[j]]]
            wk[k] = beta * e
        wk -= wk.max()
        np.exp(wk, out=wk)
        total = wk.sum()
        target = u[i] * total
        acc = 0.0
        pick = q - 1
        for k in range(q):
            acc += wk[k]
            if target < acc:
                pick = k
                break
        labels[i] = pick


def vector_metropolis_sweep(spins: np.ndarray, nbr: np.ndarray, w: np.ndarray,
                            beta: float, width: float, gauss: np.ndarray,
                            u: np.ndarray) -> int:
    """One Metropolis sweep over unit vectors (in place); returns acceptances.

    Proposal: renormalized Gaussian perturbation of the current spin.
    """
    N, m = nbr.shape
    nu = spins.shape[1]
    accepted = 0
    for i in range(N):
        row = nbr[i]
        h = np.zeros(nu)
        for j in range(m):
            h += w[j] * spins[row[j]]
        prop = spins[i] + width * gauss[i]
        # plain sum-of-squares norm, matching the compiled kernel exactly
        nrm = 0.0
        for a in range(nu):
            nrm += prop[a] * prop[a]
        prop /= math.sqrt(nrm)
        d_h = 0.0
        for a in range(nu):
            d_h -= (prop[a] - spins[i, a]) * h[a]
        if d_h <= 0.0 or u[i] < math.exp(-beta * d_h):
            spins[i] = prop
            accepted += 1
    return accepted
