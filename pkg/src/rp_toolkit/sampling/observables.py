"""Correlation estimators and the inequality checks they feed.

Two-point functions are translation-averaged per sample via FFT; errors
come from batch means over 32 batches, which stay meaningful under the
autocorrelation of single-site chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kernels import CouplingMatrix, KernelSpec, torus_greens
from ..models import ModelSpec, SpinConfiguration
from ..torus import TorusSpec

N_BATCHES = 32


class EstimateError(Exception):
    pass


@dataclass
class Certificate:
    """Outcome of an inequality check: quantities, verdict, worst margin."""
    name: str
    params: dict
    quantities: dict
    verdict: bool
    margin: float
    notes: str = ""

    def __repr__(self):
        s = "PASS" if self.verdict else "FAIL"
        return f"Certificate({self.name}: {s}, margin={self.margin:.4g})"


@dataclass
class CorrelationEstimate:
    torus: TorusSpec
    c: np.ndarray          # displacement-indexed E(S_0 . S_x), torus.shape
    c_se: np.ndarray
    chat: np.ndarray       # reciprocal-grid values, torus.shape
    chat_se: np.ndarray
    n_samples: int


def _batch_means(per_sample: np.ndarray, n_batches: int = N_BATCHES):
    """Mean and batch-means SE along axis 0."""
    n = per_sample.shape[0]
    if n < 2:
        raise EstimateError("need at least 2 samples for error bars")
    k = min(n_batches, n)
    cut = n - n % k
    batches = per_sample[:cut].reshape(k, cut // k, *per_sample.shape[1:]).mean(axis=1)
    mean = per_sample.mean(axis=0)
    se = batches.std(axis=0, ddof=1) / math.sqrt(k)
    return mean, se


def _sample_chat(sample: SpinConfiguration) -> np.ndarray:
    """|S_hat_k|^2 / N summed over spin components, on the torus grid."""
    torus = sample.torus
    vec = sample.as_vectors()
    out = np.zeros(torus.shape)
    for a in range(vec.shape[1]):
        ft = np.fft.fftn(vec[:, a].reshape(torus.shape))
        out += np.abs(ft) ** 2
    return out / torus.N


def estimate_two_point(samples: list[SpinConfiguration],
                       torus: TorusSpec) -> CorrelationEstimate:
    """Translation-averaged two-point function and its Fourier transform."""
    if len(samples) < 2:
        raise EstimateError("need at least 2 samples")
    chats = np.array([_sample_chat(s) for s in samples])
    # c(x) is the inverse transform of the per-sample chat, so average there
    cs = np.array([np.real(np.fft.ifftn(ch)) for ch in chats])
    chat, chat_se = _batch_means(chats)
    c, c_se = _batch_means(cs)
    return CorrelationEstimate(torus=torus, c=c, c_se=c_se, chat=chat,
                               chat_se=chat_se, n_samples=len(samples))


def check_infrared_bound(estimate: CorrelationEstimate,
                         couplings: CouplingMatrix, beta: float,
                         nu: int) -> Certificate:
    """chat(k) <= nu/(2 beta) / (1 - Jhat^(L)(k)) + 3 SE on every k != 0."""
    if beta <= 0:
        raise ValueError("infrared bound needs beta > 0")
    jhat = couplings.fourier_on_grid()
    mask = np.ones(estimate.torus.shape, dtype=bool)
    mask[(0,) * estimate.torus.d] = False
    bound = nu / (2.0 * beta) / (1.0 - jhat[mask])
    excess = estimate.chat[mask] - bound  # <= 3 SE required
    se = np.maximum(estimate.chat_se[mask], 1e-300)
    margins = (bound - estimate.chat[mask]) / se  # in SE units, >= -3 to pass
    worst = float(margins.min())
    return Certificate(
        name="infrared_bound",
        params={"beta": beta, "nu": nu},
        quantities={
            "worst_margin_se": worst,
            "max_excess": float(excess.max()),
            "modes_checked": int(mask.sum()),
        },
        verdict=bool(worst >= -3.0),
        margin=worst,
    )


def spin_wave_condensation_stat(samples: list[SpinConfiguration],
                                kernel: KernelSpec, beta: float) -> Certificate:
    """Both sides of the condensation bound E|L^{-d} S_hat_0|^2 >= 1 - nu/(2b) G_L(0,0).

    Also verifies Parseval per sample: sum_k |S_hat_k|^2 = L^{2d} for unit
    spins.
    """
    model = samples[0].model
    if not model.unit_spins:
        raise ValueError("condensation statistic needs unit spins")
    torus = samples[0].torus
    nu = model.nu
    stats = []
    parseval_worst = 0.0
    for s in samples:
        vec = s.as_vectors()
        total = np.zeros(vec.shape[1], dtype=complex)
        sq_sum = 0.0
        for a in range(vec.shape[1]):
            ft = np.fft.fftn(vec[:, a].reshape(torus.shape))
            total[a] = ft[(0,) * torus.d]
            sq_sum += float(np.sum(np.abs(ft) ** 2))
        parseval_worst = max(parseval_worst,
                             abs(sq_sum / torus.N**2 - 1.0))
        stats.append(float(np.sum(np.abs(total) ** 2)) / torus.N**2)
    mean, se = _batch_means(np.array(stats))
    g00 = torus_greens(torus, kernel)
    lower = 1.0 - nu / (2.0 * beta) * g00
    margin = (float(mean) - lower) / max(float(se), 1e-300)
    return Certificate(
        name="spin_wave_condensation",
        params={"beta": beta, "nu": nu},
        quantities={
            "statistic": float(mean),
            "statistic_se": float(se),
            "lower_bound": lower,
            "greens_00": g00,
            "parseval_worst": parseval_worst,
        },
        verdict=bool(margin >= -3.0 and parseval_worst < 1e-8),
        margin=margin,
    )


def check_key_estimate(samples: list[SpinConfiguration],
                       couplings: CouplingMatrix, beta: float,
                       i_d: float) -> Certificate:
    """E|sum_x J_{0,x} S_x - m*|^2 <= nu/(2 beta) I_d + 3 SE.

    m* is the empirical mean spin over all sites and samples; the left
    side is translation-averaged via the convolution theorem.
    """
    model = samples[0].model
    torus = samples[0].torus
    nu = model.nu
    jhat = couplings.fourier_on_grid()

    vecs = [s.as_vectors() for s in samples]
    m_star = np.mean([v.mean(axis=0) for v in vecs], axis=0)

    per_sample = []
    for v in vecs:
        acc = 0.0
        for a in range(v.shape[1]):
            ft = np.fft.fftn(v[:, a].reshape(torus.shape))
            conv = np.real(np.fft.ifftn(jhat * ft))  # (J * S)_y for every y
            acc += float(np.mean((conv - m_star[a]) ** 2))
        per_sample.append(acc)
    mean, se = _batch_means(np.array(per_sample))
    bound = nu / (2.0 * beta) * i_d
    margin = (bound - float(mean)) / max(float(se), 1e-300)
    return Certificate(
        name="key_estimate",
        params={"beta": beta, "nu": nu, "I_d": i_d},
        quantities={
            "statistic": float(mean),
            "statistic_se": float(se),
            "bound": bound,
            "m_star": [float(x) for x in np.atleast_1d(m_star)],
        },
        verdict=bool(margin >= -3.0),
        margin=margin,
    )
