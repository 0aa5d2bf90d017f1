"""End-to-end drivers shared by the CLI and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import ExtremumReport, NoRevivalError, find_gt_max, fit_power_law
from .hilbert import DEFAULT_CUTOFF, build_initial_state
from .propagator import EvolutionResult, evolve_series
from .twigner import DEFAULT_SEED, TrajectoryEnsemble, ensemble_mean_photon, run_ensemble

DEFAULT_GT_MAX = 1.0
DEFAULT_GT_STEP = 1e-3
SCALING_NS = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7)


def quantum_series(
    n: float,
    gt_max: float = DEFAULT_GT_MAX,
    step: float = DEFAULT_GT_STEP,
    cutoff_epsilon: float = DEFAULT_CUTOFF,
    purity: bool = False,
) -> EvolutionResult:
    grid = np.arange(int(round(gt_max / step)) + 1) * step
    state = build_initial_state(math.sqrt(n), cutoff_epsilon)
    return evolve_series(state, grid, purity=purity)


def quantum_gt_max(n: float, gt_max: float = DEFAULT_GT_MAX, step: float = DEFAULT_GT_STEP, window: int = 11):
    res = quantum_series(n, gt_max, step)
    return find_gt_max(res.times, res.n1_series, window, n_initial=n), res


def classical_window(n: float) -> float:
    """Integration span that comfortably contains the first revival.

    The revival time in units of ``1/sqrt(n)`` grows only logarithmically
    with ``n`` (the vacuum seed is ``~1/sqrt(n)`` of the pump).
    """
    return (6.0 + 1.2 * math.log(n)) / math.sqrt(n)


@dataclass
class ClassicalRevival:
    n: float
    report: ExtremumReport
    ensemble: TrajectoryEnsemble
    mean: np.ndarray


def classical_gt_max(
    n: float,
    n_traj: int = 1000,
    seed: int = DEFAULT_SEED,
    window: int = 11,
    threads: int | None = None,
    max_doublings: int = 3,
) -> ClassicalRevival:
    """Locate the first revival of the corrected ensemble-mean photon number."""
    gt_end = classical_window(n)
    for _ in range(max_doublings + 1):
        ens = run_ensemble(math.sqrt(n), n_traj, gt_end, seed=seed, threads=threads)
        mean = ensemble_mean_photon(ens).corrected
        try:
            rep = find_gt_max(ens.times, mean, window, n_initial=n)
        except NoRevivalError:
            gt_end *= 2
            continue
        if rep.index_max < ens.times.size - window:
            return ClassicalRevival(n, rep, ens, mean)
        gt_end *= 2
    raise NoRevivalError(f"no revival found for n = {n:g} up to gt = {gt_end / 2:g}")


def scaling_sweep(ns=SCALING_NS, n_traj: int = 1000, seed: int = DEFAULT_SEED, threads: int | None = None):
    """Classical ``gt_max`` for each ``n`` and the power-law fit through them."""
    revivals = [classical_gt_max(n, n_traj, seed, threads=threads) for n in ns]
    fit = fit_power_law([(r.n, r.report.gt_max) for r in revivals])
    return revivals, fit
