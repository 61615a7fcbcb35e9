# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sweep kernels; mirror of _sweeps_py with identical RNG order."""

from libc.math cimport exp, sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def ising_heatbath_sweep(double[::1] spins, int[:, ::1] nbr, double[::1] w,
                         double beta, double[::1] u):
    cdef Py_ssize_t N = nbr.shape[0]
    cdef Py_ssize_t m = nbr.shape[1]
    cdef Py_ssize_t i, j
    cdef double h, p
    for i in range(N):
        h = 0.0
        for j in range(m):
            h += w[j] * spins[nbr[i, j]]
        p = 1.0 / (1.0 + exp(-2.0 * beta * h))
        spins[i] = 1.0 if u[i] < p else -1.0


def potts_heatbath_sweep(long[::1] labels, int[:, ::1] nbr, double[::1] w,
                         double beta, double[:, ::1] dot, double[::1] u):
    cdef Py_ssize_t N = nbr.shape[0]
    cdef Py_ssize_t m = nbr.shape[1]
    cdef Py_ssize_t q = dot.shape[0]
    cdef Py_ssize_t i, j, k, pick
    cdef double e, mx, total, acc, target
    cdef double[::1] wk = np.empty(q)
    for i in range(N):
        mx = -1e300
        for k in range(q):
            e = 0.0
            for j in range(m):
                e += w[j] * dot[k, labels[nbr[i, j]]]
            wk[k] = beta * e
            if wk[k] > mx:
                mx = wk[k]
        total = 0.0
        for k in range(q):
            wk[k] = exp(wk[k] - mx)
            total += wk[k]
        target = u[i] * total
        acc = 0.0
        pick = q - 1
        for k in range(q):
            acc += wk[k]
            if target < acc:
                pick = k
                break
        labels[i] = pick


def vector_metropolis_sweep(double[:, ::1] spins, int[:, ::1] nbr,
                            double[::1] w, double beta, double width,
                            double[:, ::1] gauss, double[::1] u):
    cdef Py_ssize_t N = nbr.shape[0]
    cdef Py_ssize_t m = nbr.shape[1]
    cdef Py_ssize_t nu = spins.shape[1]
    cdef Py_ssize_t i, j, a
    cdef int accepted = 0
    cdef double d_h, nrm
    cdef double[::1] h = np.empty(nu)
    cdef double[::1] prop = np.empty(nu)
    for i in range(N):
        for a in range(nu):
            h[a] = 0.0
        for j in range(m):
            for a in range(nu):
                h[a] += w[j] * spins[nbr[i, j], a]
        nrm = 0.0
        for a in range(nu):
            prop[a] = spins[i, a] + width * gauss[i, a]
            nrm += prop[a] * prop[a]
        nrm = sqrt(nrm)
        d_h = 0.0
        for a in range(nu):
            prop[a] /= nrm
            d_h -= (prop[a] - spins[i, a]) * h[a]
        if d_h <= 0.0 or u[i] < exp(-beta * d_h):
            for a in range(nu):
                spins[i, a] = prop[a]
            accepted += 1
    return accepted
