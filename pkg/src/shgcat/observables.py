"""Reduced pump density matrix and its scalar diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import TwoModeState, coherent_amplitudes

GUARD_BAND = 5


@dataclass(frozen=True)
class DensityMatrix:
    elements: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    @property
    def mean_photon(self) -> float:
        return float(np.arange(self.dim) @ np.diag(self.elements).real)

    def check(self, herm_tol=1e-12, trace_tol=1e-9, psd_tol=1e-9) -> None:
        """Raise ``ValueError`` if Hermiticity, unit trace or positivity fails."""
        rho = self.elements
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace} differs from 1")
        if np.linalg.eigvalsh(rho).min() < -psd_tol:
            raise ValueError("density matrix is not positive semidefinite")

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        return cls(np.outer(ket, ket.conj()))


def reduce_pump(state: TwoModeState, guard: int = GUARD_BAND) -> DensityMatrix:
    """Trace out the harmonic mode.

    ``rho[n, n'] = sum_k psi(n, k) psi*(n', k)``; the cutoff is the largest
    retained pump number plus ``guard`` empty levels.
    """
    psi = state.amplitude_matrix(n1_dim=state.max_n1 + 1 + guard)
    rho = psi @ psi.conj().T
    # exact Hermiticity; the product is Hermitian only to rounding
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def purity(rho: DensityMatrix) -> float:
    r = rho.elements
    # Tr(rho^2) = sum |rho_mn|^2 for Hermitian rho
    return float(np.sum(r.real**2 + r.imag**2))


# ---------------------------------------------------------------------------
# quadratures, with X = (a + a^+)/2 so the vacuum variance is 1/4
# ---------------------------------------------------------------------------


def quadrature_moments(rho: DensityMatrix, theta: float) -> tuple[float, float]:
    """Mean and variance of ``X_theta = (a e^{-i theta} + a^+ e^{i theta}) / 2``."""
    r = rho.elements
    n = np.arange(rho.dim)
    a_mean = np.sum(np.sqrt(n[1:]) * np.diag(r, -1))  # Tr(rho a)
    a2_mean = np.sum(np.sqrt(n[2:] * n[1:-1]) * np.diag(r, -2))  # Tr(rho a^2)
    n_mean = float(n @ np.diag(r).real)
    e = np.exp(-1j * theta)
    mean = float((a_mean * e).real)
    second = 0.25 * (2.0 * (a2_mean * e * e).real + 2.0 * n_mean + 1.0)
    return mean, second - mean**2


def quadrature_variance(rho: DensityMatrix, theta: float) -> float:
    return quadrature_moments(rho, theta)[1]


def min_quadrature_variance(rho: DensityMatrix) -> tuple[float, float]:
    """Smallest ``X_theta`` variance over theta and the angle achieving it (closed form)."""
    r = rho.elements
    n = np.arange(rho.dim)
    a_mean = np.sum(np.sqrt(n[1:]) * np.diag(r, -1))
    a2_mean = np.sum(np.sqrt(n[2:] * n[1:-1]) * np.diag(r, -2))
    n_mean = float(n @ np.diag(r).real)
    # Var = (1 + 2(<n> - |<a>|^2) + 2 Re[(<a^2> - <a>^2) e^{-2i theta}]) / 4
    c = a2_mean - a_mean**2
    var = 0.25 * (1.0 + 2.0 * (n_mean - abs(a_mean) ** 2) - 2.0 * abs(c))
    theta = (0.5 * (np.angle(c) + np.pi)) % np.pi
    return float(var), float(theta)


def hermite_functions(x, dim: int) -> np.ndarray:
    """``<x|n>`` for ``n < dim`` in the X = (a + a^+)/2 convention; shape (dim, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((dim, x.size))
    out[0] = (2.0 / np.pi) ** 0.25 * np.exp(-x * x)
    if dim > 1:
        out[1] = 2.0 * x * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = (2.0 * x * out[n] - np.sqrt(n) * out[n - 1]) / np.sqrt(n + 1)
    return out


def quadrature_distribution(rho: DensityMatrix, theta: float, x) -> np.ndarray:
    """Probability density of ``X_theta`` outcomes, ``<x_theta|rho|x_theta>``."""
    h = hermite_functions(x, rho.dim)
    f = h * np.exp(-1j * theta * np.arange(rho.dim))[:, None]
    return np.einsum("mx,mn,nx->x", f, rho.elements, f.conj()).real


# ---------------------------------------------------------------------------
# closest ideal cat
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatFit:
    """Best cat ``N (|c + beta> + e^{i phi} |c - beta>)`` found for a state.

    ``center`` is 0 for the origin-centred family.
    """

    fidelity: float
    beta: complex
    rel_phase: float
    center: complex = 0j
    family: str = "displaced"


def _overlap(b1, b2):
    return np.exp(-0.5 * abs(b1) ** 2 - 0.5 * abs(b2) ** 2 + np.conj(b1) * b2)


def cat_vector(beta: complex, rel_phase: float, dim: int, center: complex = 0j) -> np.ndarray:
    """Normalised cat ket truncated to ``dim`` levels."""
    b1, b2 = center + beta, center - beta
    e = np.exp(1j * rel_phase)
    norm2 = 2.0 + 2.0 * (e * _overlap(b1, b2)).real
    v = coherent_amplitudes(b1, dim) + e * coherent_amplitudes(b2, dim)
    return v / np.sqrt(norm2)


def cat_overlap(rho: DensityMatrix, beta: complex, rel_phase: float, center: complex = 0j) -> float:
    v = cat_vector(beta, rel_phase, rho.dim, center)
    return float(np.vdot(v, rho.elements @ v).real)


def _coherent_batch(points: np.ndarray, dim: int) -> np.ndarray:
    """Columns are ``|gamma>`` for each gamma in ``points``."""
    from scipy.special import gammaln

    n = np.arange(dim)[:, None]
    pts = np.asarray(points, dtype=complex)[None, :]
    with np.errstate(divide="ignore"):
        logs = -0.5 * np.abs(pts) ** 2 + n * np.log(np.where(pts == 0, 1.0, pts)) - 0.5 * gammaln(n + 1)
    out = np.exp(logs)
    zero = pts[0] == 0
    if np.any(zero):
        out[:, zero] = 0.0
        out[0, zero] = 1.0
    return out


def _best_phase(A, B, C, s, phis):
    """Maximise ``(A + B + 2 Re(e^{i phi} C)) / (2 + 2 Re(e^{i phi} s))`` over a phase grid."""
    e = np.exp(1j * phis)[None, :]
    num = A[:, None] + B[:, None] + 2.0 * (e * C[:, None]).real
    den = 2.0 + 2.0 * (e * s[:, None]).real
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(den > 1e-12, num / den, -np.inf)
    j = np.argmax(f, axis=1)
    return f[np.arange(f.shape[0]), j], phis[j]


def _pattern_search(fun, x0, step, tol):
    """Compass search maximising ``fun``; deterministic, never decreases the objective."""
    x = np.array(x0, dtype=float)
    fx = fun(x)
    while step >= tol:
        improved = False
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * step
                fy = fun(y)
                if fy > fx:
                    x, fx = y, fy
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return x, fx


def _canonical(beta, phi):
    # (beta, phi) and (-beta, -phi) describe the same ray
    ang = np.angle(beta)
    if beta != 0 and not (0.0 <= ang < np.pi):
        beta, phi = -beta, -phi
    return complex(beta), float(phi % (2 * np.pi))


def _centered_seeds(rho: DensityMatrix, r_max: float, r_step: float, n_arg: int, n_phi: int, top: int):
    dim = rho.dim
    radii = np.arange(0.0, r_max + 1e-12, r_step)
    args = np.arange(n_arg) * (np.pi / n_arg)
    betas = (radii[:, None] * np.exp(1j * args)[None, :]).ravel()
    betas = betas[np.abs(betas) > 0]
    parity = (-1.0) ** np.arange(dim)
    U = _coherent_batch(betas, dim)
    V = parity[:, None] * U
    RU = rho.elements @ U
    RV = rho.elements @ V
    A = np.einsum("ij,ij->j", U.conj(), RU).real
    B = np.einsum("ij,ij->j", V.conj(), RV).real
    C = np.einsum("ij,ij->j", U.conj(), RV)
    s = np.exp(-2.0 * np.abs(betas) ** 2)
    phis = np.arange(n_phi) * (2 * np.pi / n_phi)
    f, ph = _best_phase(A, B, C, s, phis)
    order = np.argsort(-f)[:top]
    return [(0j, betas[i], ph[i]) for i in order]


def _husimi_peaks(rho: DensityMatrix, extent: float, step: float, count: int):
    xs = np.arange(-extent, extent + 1e-12, step)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = (X + 1j * Y).ravel()
    U = _coherent_batch(pts, rho.dim)
    q = np.einsum("ij,ij->j", U.conj(), rho.elements @ U).real.reshape(X.shape)
    from scipy.ndimage import maximum_filter

    is_peak = (q == maximum_filter(q, size=5, mode="nearest")) & (q > 1e-3 * q.max())
    idx = np.argwhere(is_peak)
    vals = q[is_peak]
    order = np.argsort(-vals)[:count]
    return [complex(xs[idx[i][0]], xs[idx[i][1]]) for i in order]


def cat_fidelity(
    rho: DensityMatrix,
    family: str = "displaced",
    r_step: float = 0.05,
    tol: float = 1e-4,
) -> CatFit:
    """Largest overlap ``<psi_cat|rho|psi_cat>`` over a cat family.

    ``family="centered"`` searches ``|beta> + e^{i phi}|-beta>``;
    ``family="displaced"`` additionally frees the midpoint of the two lobes,
    seeded from the Husimi-Q maxima. A coarse grid is followed by a compass
    search down to step ``tol``. The returned fidelity is the value at the
    returned parameters, hence a lower bound on the true maximum.
    """
    if family not in ("centered", "displaced"):
        raise ValueError("family must be 'centered' or 'displaced'")
    dim = rho.dim
    n1 = max(rho.mean_photon, 1.0)
    r_max = min(1.5 * np.sqrt(n1), 0.9 * np.sqrt(dim))
    seeds = _centered_seeds(rho, r_max, r_step, 64, 64, top=3)

    if family == "displaced":
        peaks = _husimi_peaks(rho, min(np.sqrt(n1) + 3.0, 0.9 * np.sqrt(dim)), 0.25, 6)
        pairs = [(p, q) for i, p in enumerate(peaks) for q in peaks[i + 1 :]]
        if pairs:
            c = np.array([0.5 * (p + q) for p, q in pairs])
            b = np.array([0.5 * (p - q) for p, q in pairs])
            U = _coherent_batch(c + b, dim)
            V = _coherent_batch(c - b, dim)
            RV = rho.elements @ V
            A = np.einsum("ij,ij->j", U.conj(), rho.elements @ U).real
            B = np.einsum("ij,ij->j", V.conj(), RV).real
            C = np.einsum("ij,ij->j", U.conj(), RV)
            s = _overlap(c + b, c - b)
            f, ph = _best_phase(A, B, C, s, np.arange(64) * (np.pi / 32))
            for i in np.argsort(-f)[:3]:
                seeds.append((c[i], b[i], ph[i]))

    best = None
    for c0, b0, p0 in seeds:
        if family == "centered":

            def fun(x):
                return cat_overlap(rho, complex(x[0], x[1]), x[2])

            x, fx = _pattern_search(fun, [b0.real, b0.imag, p0], 0.5 * r_step, tol)
            cand = (fx, complex(x[0], x[1]), x[2], 0j)
        else:

            def fun(x):
                return cat_overlap(rho, complex(x[2], x[3]), x[4], complex(x[0], x[1]))

            x, fx = _pattern_search(fun, [c0.real, c0.imag, b0.real, b0.imag, p0], 0.5 * r_step, tol)
            cand = (fx, complex(x[2], x[3]), x[4], complex(x[0], x[1]))
        if best is None or cand[0] > best[0]:
            best = cand

    fid, beta, phi, center = best
    beta, phi = _canonical(beta, phi)
    return CatFit(float(fid), beta, phi, complex(center), family)
