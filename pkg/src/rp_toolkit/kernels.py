"""Translation-invariant coupling kernels and their random-walk diagnostics.

All kernels are normalized step distributions: J_{0,0} = 0, J symmetric
under x -> -x and sum_x J_{0,x} = 1.  Distances are l1, which keeps the
Yukawa kernel in product form across axes and gives it a closed-form
Fourier transform.  Supported diagnostics: lattice Fourier transform,
periodization onto a torus, the return-probability (transience) integral,
the mean-field error integral, the torus Green's function, harmonic escape
profiles and direct walk simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import zeta as _zeta

from .quadrature import DivergentIntegral, QuadratureSpec, default_spec, ladder_integrate
from .torus import TorusSpec, reciprocal_grid, to_signed


class KernelError(Exception):
    pass


@dataclass(frozen=True)
class TransienceResult:
    transient: bool
    value: float | None
    error: float | None

    def __repr__(self):
        if self.transient:
            return f"TransienceResult(transient, {self.value:.6g} +- {self.error:.2g})"
        return "TransienceResult(divergent)"


class KernelSpec:
    """Base class; concrete kernels implement j_values and fourier."""

    d: int

    def j_values(self, x: np.ndarray) -> np.ndarray:
        """Coupling J_{0,x} for an (n, d) integer displacement array."""
        raise NotImplementedError

    def fourier(self, k: np.ndarray) -> np.ndarray:
        """Jhat(k) = sum_x J_{0,x} e^{ik.x}, real by symmetry.

        ``k`` has shape (..., d) or is a list of d coordinate arrays.
        """
        raise NotImplementedError

    def support(self, mass_tol: float = 1e-12):
        """Displacements and weights covering all but mass_tol of the step law."""
        raise NotImplementedError

    # -- generic helpers ------------------------------------------------

    def _stack(self, k):
        if isinstance(k, (list, tuple)):
            return np.stack(np.broadcast_arrays(*k), axis=-1)
        k = np.asarray(k, dtype=float)
        if k.shape[-1] != self.d:
            raise ValueError(f"expected trailing dimension {self.d}")
        return k


class NearestNeighbor(KernelSpec):
    """Uniform steps to the 2d nearest neighbors, weight 1/(2d) each."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d

    def j_values(self, x):
        x = np.asarray(x, dtype=np.int64)
        l1 = np.abs(x).sum(axis=-1)
        return np.where(l1 == 1, 1.0 / (2 * self.d), 0.0)

    def fourier(self, k):
        k = self._stack(k)
        return np.cos(k).mean(axis=-1)

    def support(self, mass_tol: float = 1e-12):
        disp = []
        for j in range(self.d):
            for s in (+1, -1):
                v = [0] * self.d
                v[j] = s
                disp.append(v)
        disp = np.array(disp, dtype=np.int64)
        w = np.full(len(disp), 1.0 / (2 * self.d))
        return disp, w

    def __repr__(self):
        return f"NearestNeighbor(d={self.d})"


def _yukawa_axis_factor(mu: float, k: np.ndarray) -> np.ndarray:
    """S(k) = sum_m e^{-mu|m|} e^{ikm} in closed form (geometric series)."""
    e = math.exp(-mu)
    return (1.0 - e * e) / (1.0 - 2.0 * e * np.cos(k) + e * e)


class Yukawa(KernelSpec):
    """J_{0,x} = C e^{-mu |x|_1}, x != 0, with C fixed by normalization."""

    def __init__(self, d: int, mu: float):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.d = d
        self.mu = mu
        s0 = _yukawa_axis_factor(mu, np.array(0.0))
        self.C = 1.0 / (float(s0) ** d - 1.0)

    def j_values(self, x):
        x = np.asarray(x, dtype=np.int64)
        vals = self.C * np.exp(-self.mu * np.abs(x).sum(axis=-1))
        l1 = np.abs(x).sum(axis=-1)
        return np.where(l1 == 0, 0.0, vals)

    def fourier(self, k):
        k = self._stack(k)
        prod = np.prod(_yukawa_axis_factor(self.mu, k), axis=-1)
        return self.C * (prod - 1.0)

    def support(self, mass_tol: float = 1e-12):
        # per-axis tail e^{-mu r} => box radius from the total tail mass
        R = 1
        while True:
            disp = np.array(
                [v for v in product(range(-R, R + 1), repeat=self.d) if any(v)],
                dtype=np.int64,
            )
            w = self.j_values(disp)
            if 1.0 - w.sum() < mass_tol or R > 2000:
                return disp, w / w.sum()
            R = int(R * 1.8) + 1

    def __repr__(self):
        return f"Yukawa(d={self.d}, mu={self.mu})"


def _l1_shell_count(d: int, r: int) -> int:
    """Number of lattice points with |x|_1 = r (r >= 1)."""
    return sum(
        2**j * math.comb(d, j) * math.comb(r - 1, j - 1)
        for j in range(1, min(d, r) + 1)
    )


def _l1_zeta_sum(d: int, s: float) -> float:
    """sum_{x != 0} |x|_1^{-s}, exactly, via shell-count polynomials.

    The shell count is a polynomial in r of degree d-1, so the sum is a
    finite combination of Riemann zeta values zeta(s - m), m < d < s.
    """
    total = 0.0
    for j in range(1, d + 1):
        # binom(r-1, j-1) as a polynomial in r
        coeffs = np.array([1.0])
        for i in range(1, j):
            coeffs = np.convolve(coeffs, np.array([1.0, -float(i)]))
        coeffs /= math.factorial(j - 1)
        # coeffs[::-1][m] multiplies r^m
        for m, c in enumerate(coeffs[::-1]):
            if c != 0.0:
                total += 2**j * math.comb(d, j) * c * float(_zeta(s - m, 1))
    return total


class PowerLaw(KernelSpec):
    """J_{0,x} = C |x|_1^{-s}, s > d.  Closed-form transform in d=1."""

    def __init__(self, d: int, s: float, fourier_cutoff: int = 2000):
        if s <= d:
            raise KernelError(f"power law needs s > d for summability (s={s}, d={d})")
        self.d = d
        self.s = s
        self.C = 1.0 / _l1_zeta_sum(d, s)
        self.fourier_cutoff = fourier_cutoff

    def j_values(self, x):
        x = np.asarray(x, dtype=np.int64)
        l1 = np.abs(x).sum(axis=-1)
        with np.errstate(divide="ignore"):
            vals = self.C * np.where(l1 == 0, np.inf, l1.astype(float)) ** (-self.s)
        return np.where(l1 == 0, 0.0, vals)

    def fourier(self, k):
        k = self._stack(k)
        if self.d == 1:
            return self._fourier_1d(k[..., 0])
        # direct shell sum; adequate only when the tail decays fast
        tail = 2.0 * _l1_shell_count(self.d, self.fourier_cutoff) * self.C * (
            self.fourier_cutoff ** (1.0 - self.s)
        ) / max(self.s - self.d, 1e-9)
        if tail > 1e-8:
            raise KernelError(
                f"power-law Fourier sum tail {tail:.2g} too large; raise fourier_cutoff"
            )
        disp, w = self.support()
        phases = np.tensordot(k, disp.T.astype(float), axes=([-1], [0]))
        out = np.cos(phases) @ w
        return out

    def _fourier_1d(self, k):
        """1 - Jhat has a |k|^{s-1} cusp; evaluate via polylog (mpmath)."""
        import mpmath

        flat = np.atleast_1d(np.asarray(k, dtype=float)).ravel()
        vals = np.empty_like(flat)
        for i, kk in enumerate(flat):
            li = mpmath.polylog(self.s, mpmath.exp(1j * kk))
            vals[i] = 2.0 * self.C * float(mpmath.re(li))
        vals = vals.reshape(np.shape(k))
        return vals if np.ndim(k) else float(vals)

    def support(self, mass_tol: float = 1e-12):
        R = self.fourier_cutoff if self.d > 1 else 4000
        if self.d == 1:
            m = np.arange(1, R + 1)
            disp = np.concatenate([m, -m])[:, None].astype(np.int64)
        else:
            disp = np.array(
                [v for v in product(range(-R, R + 1), repeat=self.d) if any(v)],
                dtype=np.int64,
            )
        w = self.j_values(disp)
        return disp, w / w.sum()

    def __repr__(self):
        return f"PowerLaw(d={self.d}, s={self.s})"


class Mixture(KernelSpec):
    """Convex combination of kernels on the same lattice."""

    def __init__(self, components: list[tuple[float, KernelSpec]]):
        if not components:
            raise ValueError("empty mixture")
        ds = {k.d for _, k in components}
        if len(ds) != 1:
            raise ValueError("mixture components must share the lattice dimension")
        wsum = sum(w for w, _ in components)
        if abs(wsum - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {wsum}, expected 1")
        if any(w <= 0 for w, _ in components):
            raise ValueError("mixture weights must be positive")
        self.d = ds.pop()
        self.components = components

    def j_values(self, x):
        return sum(w * k.j_values(x) for w, k in self.components)

    def fourier(self, k):
        return sum(w * c.fourier(k) for w, c in self.components)

    def support(self, mass_tol: float = 1e-12):
        tables = {}
        for w, comp in self.components:
            disp, cw = comp.support(mass_tol)
            for v, jw in zip(map(tuple, disp), cw):
                tables[v] = tables.get(v, 0.0) + w * jw
        disp = np.array(sorted(tables), dtype=np.int64)
        wts = np.array([tables[tuple(v)] for v in disp])
        return disp, wts / wts.sum()

    def __repr__(self):
        return f"Mixture({self.components!r})"


# ---------------------------------------------------------------------------
# periodization


@dataclass(frozen=True)
class CouplingMatrix:
    """Periodized couplings J^{(L)}_{0,v} for every displacement v on T_L."""

    torus: TorusSpec
    values: np.ndarray  # shape torus.shape, entry at v = J^{(L)}_{0,v}
    tail_cutoff: int
    truncation_error: float
    kernel: KernelSpec

    def row_sum(self) -> float:
        return float(self.values.sum())

    def fourier_on_grid(self) -> np.ndarray:
        """Jhat^(L) on the reciprocal grid = real FFT of the values."""
        out = np.fft.fftn(self.values)
        return np.real(out)


def periodize(kernel: KernelSpec, torus: TorusSpec, cutoff: int = None,
              tol: float = 1e-12) -> CouplingMatrix:
    """J^{(L)}_{0,v} = sum_{|z|_inf <= cutoff} J_{0, v + L z}.

    The reported truncation error is the total coupling mass outside the
    wrapped box; the call fails when it exceeds ``tol``.
    """
    if cutoff is None:
        cutoff = _auto_cutoff(kernel, torus, tol)
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    d, L = torus.d, torus.L
    coords = np.array(list(product(range(L), repeat=d)), dtype=np.int64)
    vals = np.zeros(len(coords))
    for z in product(range(-cutoff, cutoff + 1), repeat=d):
        shift = coords + L * np.asarray(z, dtype=np.int64)
        vals += kernel.j_values(shift)
    trunc = abs(1.0 - vals.sum())
    if trunc > tol:
        raise KernelError(
            f"periodization cutoff {cutoff} leaves tail mass {trunc:.3g} > {tol:.3g}"
        )
    return CouplingMatrix(
        torus=torus,
        values=vals.reshape(torus.shape),
        tail_cutoff=cutoff,
        truncation_error=trunc,
        kernel=kernel,
    )


def _auto_cutoff(kernel: KernelSpec, torus: TorusSpec, tol: float) -> int:
    if isinstance(kernel, NearestNeighbor):
        return 1
    if isinstance(kernel, Yukawa):
        # tail mass ~ e^{-mu L c}; solve with slack
        c = int(np.ceil(-np.log(tol * 1e-3) / (kernel.mu * torus.L))) + 1
        return max(c, 1)
    if isinstance(kernel, Mixture):
        return max(_auto_cutoff(k, torus, tol) for _, k in kernel.components)
    return max(1, int(np.ceil(4000 / torus.L)))


# ---------------------------------------------------------------------------
# random-walk diagnostics


def transience_integral(kernel: KernelSpec, quad: QuadratureSpec = None) -> TransienceResult:
    """int dk/(2pi)^d of 1/(1 - Jhat(k)); Divergent <=> recurrent walk."""
    quad = quad or default_spec(kernel.d)

    def f(*grids):
        return 1.0 / (1.0 - kernel.fourier(list(grids)))

    try:
        val, err = ladder_integrate(f, kernel.d, quad)
    except DivergentIntegral:
        return TransienceResult(transient=False, value=None, error=None)
    return TransienceResult(transient=True, value=val, error=err)


def mean_field_error_integral(kernel: KernelSpec, quad: QuadratureSpec = None) -> TransienceResult:
    """I_d = int Jhat^2/(1 - Jhat) dk/(2pi)^d; expected post-exit returns."""
    quad = quad or default_spec(kernel.d)

    def f(*grids):
        jh = kernel.fourier(list(grids))
        return jh * jh / (1.0 - jh)

    try:
        val, err = ladder_integrate(f, kernel.d, quad)
    except DivergentIntegral:
        return TransienceResult(transient=False, value=None, error=None)
    return TransienceResult(transient=True, value=val, error=err)


def torus_greens(torus: TorusSpec, kernel: KernelSpec, x=None, y=None) -> float:
    """G_L(x,y) = (1/L^d) sum_{k != 0} e^{ik.(x-y)} / (1 - Jhat(k)).

    At reciprocal vectors the transform of the periodized kernel equals
    the infinite-volume transform exactly (aliasing identity), so Jhat is
    evaluated in closed form.
    """
    ks = to_signed(reciprocal_grid(torus))
    jh = kernel.fourier(ks)
    nonzero = np.ones(len(ks), dtype=bool)
    nonzero[0] = False
    if np.any(jh[nonzero] >= 1.0):
        raise KernelError("degenerate kernel: Jhat(k) >= 1 on a nonzero mode")
    if x is None and y is None:
        disp = np.zeros(torus.d)
    else:
        x = np.asarray(x if x is not None else np.zeros(torus.d), dtype=float)
        y = np.asarray(y if y is not None else np.zeros(torus.d), dtype=float)
        disp = x - y
    phase = np.cos(ks[nonzero] @ disp)
    return float(np.sum(phase / (1.0 - jh[nonzero])) / torus.N)


def greens_vector(torus: TorusSpec, kernel: KernelSpec) -> np.ndarray:
    """G_L(0, .) for every site, via FFT of the reciprocal-space weights."""
    shape = torus.shape
    ns = np.meshgrid(*[np.arange(torus.L)] * torus.d, indexing="ij")
    ks = [to_signed(2.0 * np.pi * n / torus.L) for n in ns]
    jh = kernel.fourier(ks)
    weights = np.zeros(shape)
    mask = np.ones(shape, dtype=bool)
    mask[(0,) * torus.d] = False
    weights[mask] = 1.0 / (1.0 - jh[mask])
    return np.real(np.fft.ifftn(weights))


# ---------------------------------------------------------------------------
# harmonic escape profile (Dirichlet-form witness of recurrence/transience)


@dataclass(frozen=True)
class EscapeProfile:
    R: int
    alpha: float
    phi: np.ndarray            # field on the closed box [-R, R]^d
    dirichlet_form: float      # from the boundary identity at the origin
    dirichlet_form_direct: float  # from the full quadratic form


def harmonic_escape_profile(kernel: KernelSpec, R: int, alpha: float = 1.0,
                            mass_tol: float = 1e-12) -> EscapeProfile:
    """Solve for phi_x = alpha * P_x(hit 0 before exiting [-R,R]^d).

    phi equals alpha at the origin, vanishes off the box, and is harmonic
    for the walk generator elsewhere in the box.  The Dirichlet form is
    returned twice: via the boundary identity alpha*sum_y J_{0,y}(alpha -
    phi_y), and via the full quadratic form (1/2) sum J (phi_x - phi_y)^2.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    d = kernel.d
    disp, w = kernel.support(mass_tol)
    side = 2 * R + 1
    box = np.array(list(product(range(-R, R + 1), repeat=d)), dtype=np.int64)
    index = {tuple(v): i for i, v in enumerate(box)}
    origin = index[(0,) * d]

    interior = [i for i in range(len(box)) if i != origin]
    pos = {i: n for n, i in enumerate(interior)}
    n = len(interior)

    rows, cols, data = [], [], []
    b = np.zeros(n)
    for i in interior:
        r = pos[i]
        rows.append(r)
        cols.append(r)
        data.append(1.0)
        for v, jw in zip(disp, w):
            tgt = tuple(box[i] + v)
            j = index.get(tgt)
            if j is None:
                continue  # phi = 0 outside the box
            if j == origin:
                b[r] += jw * alpha
            else:
                rows.append(r)
                cols.append(pos[j])
                data.append(-jw)
    A = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    sol = spla.spsolve(A, b)

    phi = np.zeros(len(box))
    phi[origin] = alpha
    for i in interior:
        phi[i] = sol[pos[i]]

    # boundary identity: harmonicity leaves only the origin term
    e_boundary = 0.0
    for v, jw in zip(disp, w):
        j = index.get(tuple(v))
        phiv = phi[j] if j is not None else 0.0
        e_boundary += jw * (alpha - phiv)
    e_boundary *= alpha

    # direct quadratic form with phi extended by zero off the box
    e_direct = 0.0
    for v, jw in zip(disp, w):
        shifted = box + v
        inside = np.all(np.abs(shifted) <= R, axis=1)
        phiv = np.zeros(len(box))
        idxs = [index.get(tuple(s)) for s in shifted[inside]]
        phiv[inside] = phi[idxs]
        e_direct += 0.5 * jw * np.sum((phi - phiv) ** 2)
        # bonds whose base lies outside the box never appear in this loop,
        # so the crossing contribution (phi_x - 0)^2 needs its second half
        e_direct += 0.5 * jw * np.sum(phi[~inside] ** 2)

    return EscapeProfile(
        R=R,
        alpha=alpha,
        phi=phi.reshape((side,) * d),
        dirichlet_form=float(e_boundary),
        dirichlet_form_direct=float(e_direct),
    )


# ---------------------------------------------------------------------------
# Monte Carlo walk oracle


def simulate_walk_returns(kernel: KernelSpec, steps: int, walks: int, seed: int,
                          mass_tol: float = 1e-12):
    """Monte Carlo estimate of the expected number of visits to the origin.

    Counts the visit at time 0, so the estimate targets the transience
    integral E_0 N = 1/(1 - P_0(return)).  Returns (estimate, stderr).
    """
    if steps < 1 or walks < 1:
        raise ValueError("steps and walks must be >= 1")
    disp, w = kernel.support(mass_tol)
    rng = np.random.default_rng(seed)
    pos = np.zeros((walks, kernel.d), dtype=np.int64)
    visits = np.ones(walks)  # time-0 visit
    probs = w / w.sum()
    for _ in range(steps):
        idx = rng.choice(len(disp), size=walks, p=probs)
        pos += disp[idx]
        visits += np.all(pos == 0, axis=1)
    est = float(visits.mean())
    se = float(visits.std(ddof=1) / math.sqrt(walks))
    return est, se
