"""Exact SHG evolution by per-block eigendecomposition, plus the Kerr oracle."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .hilbert import (
    DEFAULT_CUTOFF,
    TwoModeState,
    block_hamiltonian,
    check_quantum_guard,
    coherent_amplitudes,
    poisson_window,
)

_TIME_CHUNK = 64


@lru_cache(maxsize=4096)
def block_eigensystem(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of the block-N coupling matrix."""
    h = block_hamiltonian(N)
    if h.dim == 1:
        w, v = np.zeros(1), np.ones((1, 1))
    else:
        w, v = eigh_tridiagonal(np.zeros(h.dim), np.asarray(h.offdiag))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def evolve(state: TwoModeState, gt: float) -> TwoModeState:
    """Apply ``exp(i gt (a1^+2 a2 + a1^2 a2^+))``; negative ``gt`` runs backward."""
    gt = float(gt)
    if not np.isfinite(gt):
        raise ValueError("gt must be finite")
    if gt == 0.0:
        return state
    out = []
    for N, amps in state:
        w, v = block_eigensystem(N)
        out.append(v @ (np.exp(1j * gt * w) * (v.T @ amps)))
    return state.with_blocks(out)


@dataclass
class EvolutionResult:
    times: np.ndarray
    n1_series: np.ndarray
    n2_series: np.ndarray
    states: list | None = None
    purity_series: np.ndarray | None = None

    @property
    def invariant_series(self) -> np.ndarray:
        return self.n1_series + 2 * self.n2_series


def _check_grid(gt_grid) -> np.ndarray:
    t = np.asarray(gt_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("gt grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(t)):
        raise ValueError("gt grid must be finite")
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("gt grid must start at 0 and be strictly increasing")
    return t


def evolve_series(
    state: TwoModeState,
    gt_grid,
    keep_states: bool = False,
    purity: bool = False,
) -> EvolutionResult:
    """Photon-number series on a time grid.

    Each block is diagonalised once; only the phases ``exp(i lambda gt)``
    change between grid points. ``purity=True`` also returns ``Tr rho_pump^2``
    per time, computed through the (smaller) harmonic-mode reduced matrix.
    """
    t = _check_grid(gt_grid)
    T = t.size
    n1 = np.zeros(T)
    n2 = np.zeros(T)
    modes = []
    for N, amps in state:
        w, v = block_eigensystem(N)
        m = v * (v.T @ amps)  # m[k, j] = v[k, j] c_j
        modes.append((N, w, m))
        k = np.arange(N // 2 + 1)
        for s in range(0, T, _TIME_CHUNK):
            a = np.exp(1j * np.outer(t[s : s + _TIME_CHUNK], w)) @ m.T
            p = a.real**2 + a.imag**2
            n1[s : s + _TIME_CHUNK] += p @ (N - 2 * k)
            n2[s : s + _TIME_CHUNK] += p @ k

    states = [evolve(state, gt) for gt in t] if keep_states else None

    pur = None
    if purity:
        pur = np.zeros(T)
        n1_dim, n2_dim = state.max_n1 + 1, state.max_n2 + 1
        for s in range(0, T, _TIME_CHUNK):
            tc = t[s : s + _TIME_CHUNK]
            psi = np.zeros((tc.size, n1_dim, n2_dim), dtype=complex)
            for N, w, m in modes:
                k = np.arange(N // 2 + 1)
                psi[:, N - 2 * k, k] = np.exp(1j * np.outer(tc, w)) @ m.T
            sigma = np.einsum("tik,til->tkl", psi, psi.conj())
            pur[s : s + _TIME_CHUNK] = np.einsum("tkl,tlk->t", sigma, sigma).real
    return EvolutionResult(t, n1, n2, states, pur)


# ---------------------------------------------------------------------------
# single-mode Kerr medium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KerrState:
    coeffs: np.ndarray
    mean_n: float
    phi_nl: float
    alpha: complex = 0j

    @property
    def photon_distribution(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2


def kerr_evolve(alpha: complex, phi_nl: float, cutoff_epsilon: float = DEFAULT_CUTOFF) -> KerrState:
    """``exp(i phi_nl n^2 / (2 <n>)) |alpha>`` with ``<n> = |alpha|^2`` of the input."""
    alpha = complex(alpha)
    phi_nl = float(phi_nl)
    if not np.isfinite(phi_nl):
        raise ValueError("phi_nl must be finite")
    if not (0 < cutoff_epsilon <= 1e-6):
        raise ValueError("cutoff_epsilon must lie in (0, 1e-6]")
    mean = abs(alpha) ** 2
    check_quantum_guard(mean)
    _, hi = poisson_window(mean, cutoff_epsilon)
    c = coherent_amplitudes(alpha, hi + 1)
    if mean > 0:
        n = np.arange(hi + 1, dtype=float)
        c = c * np.exp(1j * phi_nl * n**2 / (2.0 * mean))
    return KerrState(c, mean, phi_nl, alpha)


def kerr_cat_reference(alpha: complex, dim: int) -> np.ndarray:
    """``(e^{i pi/4}/sqrt 2)(|alpha> + e^{-i pi/2}|-alpha>)``: the Kerr state at ``phi_nl = pi <n>``."""
    return np.exp(1j * np.pi / 4) / np.sqrt(2) * (
        coherent_amplitudes(alpha, dim) + np.exp(-1j * np.pi / 2) * coherent_amplitudes(-alpha, dim)
    )


def kerr_cat_overlap(state: KerrState) -> float:
    """``|<psi_cat|psi>|^2`` against the two-component Kerr cat."""
    ref = kerr_cat_reference(state.alpha, state.coeffs.size)
    return float(abs(np.vdot(ref, state.coeffs)) ** 2)
