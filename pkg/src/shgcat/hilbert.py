"""Two-mode Fock states stored by blocks of conserved N = n1 + 2 n2.

The SHG Hamiltonian only couples |n1, n2> to |n1 -+ 2, n2 +- 1>, so every
block ``N`` is closed under evolution. Block ``N`` holds the amplitudes of
``|N - 2k, k>`` for ``k = 0 .. N // 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

MAX_QUANTUM_PHOTONS = 1.0e4
DEFAULT_CUTOFF = 1e-12


class ClassicalPathRequired(ValueError):
    """Raised when a photon number is too large for exact Fock evolution."""


@dataclass(frozen=True)
class TwoModeState:
    """Pure pump/harmonic state as a list of N-blocks.

    ``blocks[i]`` is the complex amplitude vector of block ``Ns[i]``; entry
    ``k`` belongs to ``|Ns[i] - 2k, k>``.
    """

    Ns: tuple
    blocks: tuple
    cutoff_epsilon: float = DEFAULT_CUTOFF
    alpha0: complex = 0j

    def __post_init__(self):
        Ns = tuple(int(N) for N in self.Ns)
        if len(Ns) != len(self.blocks):
            raise ValueError("one amplitude vector per block required")
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("block indices must be strictly increasing")
        blocks = []
        for N, amps in zip(Ns, self.blocks):
            if N < 0:
                raise ValueError("block index must be nonnegative")
            amps = np.array(amps, dtype=complex)
            if amps.shape != (N // 2 + 1,):
                raise ValueError(f"block {N} needs {N // 2 + 1} amplitudes, got {amps.shape}")
            amps.setflags(write=False)
            blocks.append(amps)
        object.__setattr__(self, "Ns", Ns)
        object.__setattr__(self, "blocks", tuple(blocks))

    def __iter__(self):
        return iter(zip(self.Ns, self.blocks))

    def __len__(self):
        return len(self.Ns)

    @property
    def norm2(self) -> float:
        return float(sum(np.vdot(a, a).real for a in self.blocks))

    @property
    def max_n1(self) -> int:
        return max(self.Ns) if self.Ns else 0

    @property
    def max_n2(self) -> int:
        return max(self.Ns) // 2 if self.Ns else 0

    def with_blocks(self, blocks) -> "TwoModeState":
        return TwoModeState(self.Ns, tuple(blocks), self.cutoff_epsilon, self.alpha0)

    def amplitude_matrix(self, n1_dim: int | None = None, n2_dim: int | None = None) -> np.ndarray:
        """Dense ``psi[n1, n2]`` array, zero outside the retained blocks."""
        n1_dim = self.max_n1 + 1 if n1_dim is None else n1_dim
        n2_dim = self.max_n2 + 1 if n2_dim is None else n2_dim
        psi = np.zeros((n1_dim, n2_dim), dtype=complex)
        for N, amps in self:
            k = np.arange(N // 2 + 1)
            psi[N - 2 * k, k] = amps
        return psi

    def distance(self, other: "TwoModeState") -> float:
        """Euclidean distance between amplitude vectors (missing blocks count as zero)."""
        a = dict(self)
        b = dict(other)
        total = 0.0
        for N in set(a) | set(b):
            va = a.get(N)
            vb = b.get(N)
            if va is None:
                va = np.zeros_like(vb)
            if vb is None:
                vb = np.zeros_like(va)
            total += float(np.sum(np.abs(va - vb) ** 2))
        return float(np.sqrt(total))


@dataclass(frozen=True)
class BlockHamiltonian:
    """Tridiagonal coupling of block ``N`` (zero diagonal)."""

    N: int
    offdiag: np.ndarray
    # H = -g (a1^+2 a2 + h.c.), so H / (hbar g) = coupling_sign * T_N
    coupling_sign: float = -1.0

    @property
    def dim(self) -> int:
        return self.N // 2 + 1

    def dense(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@lru_cache(maxsize=4096)
def _offdiag(N: int) -> np.ndarray:
    k = np.arange(N // 2, dtype=float)
    off = np.sqrt((N - 2 * k) * (N - 2 * k - 1) * (k + 1))
    off.setflags(write=False)
    return off


def block_hamiltonian(N: int) -> BlockHamiltonian:
    """Matrix of ``a1^+2 a2 + a1^2 a2^+`` restricted to block ``N``.

    Entry ``k`` couples ``|N-2k, k>`` and ``|N-2k-2, k+1>`` with strength
    ``sqrt((N-2k)(N-2k-1)(k+1))``.
    """
    N = int(N)
    if N < 0:
        raise ValueError("N must be nonnegative")
    return BlockHamiltonian(N, _offdiag(N))


def coherent_log_amplitudes(alpha: complex, n: np.ndarray) -> np.ndarray:
    """``log`` of ``exp(-|a|^2/2) a^n / sqrt(n!)`` as complex logs (alpha != 0)."""
    n = np.asarray(n, dtype=float)
    return -0.5 * abs(alpha) ** 2 + n * np.log(complex(alpha)) - 0.5 * gammaln(n + 1)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes ``<n|alpha>`` for ``n < dim``."""
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    return np.exp(coherent_log_amplitudes(alpha, np.arange(dim)))


def poisson_window(mean: float, cutoff_epsilon: float) -> tuple[int, int]:
    """Contiguous photon-number range holding all but ``cutoff_epsilon`` of a Poisson law."""
    if mean == 0:
        return 0, 0
    lo = int(poisson.ppf(cutoff_epsilon / 2, mean))
    hi = int(poisson.isf(cutoff_epsilon / 2, mean)) + 1
    # ppf can land one above the true quantile in the far tail
    lo = max(lo - 1, 0)
    while poisson.cdf(lo - 1, mean) + poisson.sf(hi, mean) > cutoff_epsilon:
        hi += 1
    return lo, hi


def check_quantum_guard(mean_photons: float) -> None:
    if mean_photons > MAX_QUANTUM_PHOTONS:
        raise ClassicalPathRequired(
            f"<n> = {mean_photons:g} exceeds the exact-evolution guard of {MAX_QUANTUM_PHOTONS:g}; "
            "use the classical (truncated Wigner) path instead"
        )


def build_initial_state(alpha: complex, cutoff_epsilon: float = DEFAULT_CUTOFF) -> TwoModeState:
    """Coherent pump ``|alpha>`` times harmonic vacuum."""
    if not (0 < cutoff_epsilon <= 1e-6):
        raise ValueError("cutoff_epsilon must lie in (0, 1e-6]")
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    mean = abs(alpha) ** 2
    check_quantum_guard(mean)
    if alpha == 0:
        return TwoModeState((0,), (np.array([1.0 + 0j]),), cutoff_epsilon, alpha)

    lo, hi = poisson_window(mean, cutoff_epsilon)
    n = np.arange(lo, hi + 1)
    c = np.exp(coherent_log_amplitudes(alpha, n))
    blocks = []
    for N, cN in zip(n, c):
        amps = np.zeros(N // 2 + 1, dtype=complex)
        amps[0] = cN
        blocks.append(amps)
    return TwoModeState(tuple(int(N) for N in n), tuple(blocks), cutoff_epsilon, alpha)


def fock_product_state(n1: int, n2: int) -> TwoModeState:
    """Basis state ``|n1, n2>`` as a one-block state."""
    N = n1 + 2 * n2
    amps = np.zeros(N // 2 + 1, dtype=complex)
    amps[n2] = 1.0
    return TwoModeState((N,), (amps,), DEFAULT_CUTOFF, 0j)


def mean_photon(state: TwoModeState, mode: int) -> float:
    """``<n1>`` (mode 1, pump) or ``<n2>`` (mode 2, harmonic)."""
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    total = 0.0
    for N, amps in state:
        k = np.arange(N // 2 + 1)
        p = np.abs(amps) ** 2
        total += float(p @ ((N - 2 * k) if mode == 1 else k))
    return total


def manley_rowe(state: TwoModeState) -> float:
    """``<n1> + 2 <n2>``, i.e. ``<N>``."""
    return float(sum(N * np.vdot(a, a).real for N, a in state))
