"""Pump-mode Schroedinger-cat formation in second-harmonic generation.

Exact two-mode Fock evolution, Wigner analysis of the pump, and a
truncated-Wigner classical-trajectory path for large photon numbers.
"""

__version__ = "0.1.0"

from .analysis import ExtremumReport, PowerLawFit, conversion_ratio, find_gt_max, fit_power_law  # noqa: E402
from .hilbert import TwoModeState, block_hamiltonian, build_initial_state, mean_photon  # noqa: E402
from .observables import DensityMatrix, cat_fidelity, purity, quadrature_variance, reduce_pump  # noqa: E402
from .propagator import evolve, evolve_series, kerr_evolve  # noqa: E402
from .twigner import ensemble_mean_photon, final_scatter, run_ensemble, sample_inputs  # noqa: E402
from .wigner import marginals, negativity, wigner_grid  # noqa: E402

__all__ = [
    "DensityMatrix",
    "ExtremumReport",
    "PowerLawFit",
    "TwoModeState",
    "block_hamiltonian",
    "build_initial_state",
    "cat_fidelity",
    "conversion_ratio",
    "ensemble_mean_photon",
    "evolve",
    "evolve_series",
    "final_scatter",
    "find_gt_max",
    "fit_power_law",
    "kerr_evolve",
    "marginals",
    "mean_photon",
    "negativity",
    "purity",
    "quadrature_variance",
    "reduce_pump",
    "run_ensemble",
    "sample_inputs",
    "wigner_grid",
]
