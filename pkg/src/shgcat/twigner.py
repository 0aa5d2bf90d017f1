"""Classical-trajectory (truncated Wigner) simulation of SHG.

Each trajectory starts from ``a1 = alpha + x1 + i y1``, ``a2 = x2 + i y2`` with
independent Gaussian quadratures of variance 1/4, then follows

    da1/d(gt) = 2i a2 conj(a1),    da2/d(gt) = i a1^2

with fixed-step RK4. Trajectory ``i`` draws its noise from its own Philox
counter block keyed by the seed, so a sample does not depend on how many
others are drawn or on thread scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _accel, _kernels

DEFAULT_SEED = 2026
DRIFT_GATE = 1e-8
# precondition on the RK4 step, in units of 1 / sqrt(|a1|^2 + 2|a2|^2)
MAX_SCALED_STEP = 0.1
# default step actually used; well inside the drift gate
DEFAULT_SCALED_STEP = 0.01
MAX_STEP = 1e-3
VACUUM_HALF = 0.5


class IntegrationGateError(RuntimeError):
    """Trajectories whose invariant drifted past the gate or went non-finite."""

    def __init__(self, message, bad_indices=()):
        super().__init__(message)
        self.bad_indices = list(bad_indices)


class ClassicalSample(NamedTuple):
    a1: complex
    a2: complex


@dataclass(frozen=True)
class InputSamples:
    seed: int
    alpha: complex
    a1: np.ndarray
    a2: np.ndarray

    def __len__(self):
        return self.a1.size

    def __getitem__(self, i) -> ClassicalSample:
        return ClassicalSample(complex(self.a1[i]), complex(self.a2[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(index)]))


def sample_inputs(rng_seed: int, alpha: complex, n_traj: int) -> InputSamples:
    """Draw Wigner samples of ``|alpha> (x) |0>``."""
    n_traj = int(n_traj)
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    noise = np.empty((n_traj, 4))
    for i in range(n_traj):
        noise[i] = _substream(rng_seed, i).standard_normal(4)
    noise *= 0.5
    a1 = complex(alpha) + noise[:, 0] + 1j * noise[:, 1]
    a2 = noise[:, 2] + 1j * noise[:, 3]
    return InputSamples(int(rng_seed), complex(alpha), a1, a2)


def step_bound(a1, a2, scaled: float = MAX_SCALED_STEP) -> float:
    """``min(1e-3, scaled / sqrt(max |a1|^2 + 2|a2|^2))`` over the given amplitudes."""
    inv = np.max(np.abs(np.atleast_1d(a1)) ** 2 + 2.0 * np.abs(np.atleast_1d(a2)) ** 2)
    if inv <= 0:
        return MAX_STEP
    return min(MAX_STEP, scaled / math.sqrt(inv))


def _plan(gt_end, record_step, h_max):
    """Split ``[0, gt_end]`` into records of ``record_step``, each of ``sub`` RK4 steps."""
    if not (np.isfinite(gt_end) and gt_end > 0):
        raise ValueError("gt_end must be positive and finite")
    if record_step is None:
        record_step = h_max
    n_records = max(1, int(round(gt_end / record_step)))
    record_step = gt_end / n_records
    sub = max(1, math.ceil(record_step / h_max - 1e-9))
    return n_records, sub, record_step / sub, record_step


def _integrate(a1, a2, gt_end, record_step, h_max, keep):
    n_records, sub, h, rstep = _plan(gt_end, record_step, h_max)
    n = a1.size
    n1 = np.empty((n_records + 1, n))
    rows = n_records + 1 if keep else 1
    a1_out = np.empty((rows, n), dtype=complex)
    a2_out = np.empty((rows, n), dtype=complex)
    drift = np.empty(n)
    finite = np.empty(n, dtype=np.bool_)
    _kernels.rk4_ensemble(
        np.ascontiguousarray(a1, dtype=complex),
        np.ascontiguousarray(a2, dtype=complex),
        h,
        n_records,
        sub,
        keep,
        n1,
        a1_out,
        a2_out,
        drift,
        finite,
    )
    times = np.arange(n_records + 1) * rstep
    return times, n1, a1_out, a2_out, drift, finite, h


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    drift: float
    dt: float


def integrate_trajectory(
    sample: ClassicalSample, gt_end: float, dt: float | None = None, record_step: float | None = None
) -> TrajectoryRecord:
    """RK4 solution of one trajectory from ``gt = 0`` to ``gt_end``.

    ``dt`` must not exceed ``min(1e-3, 0.1 / sqrt(|a1|^2 + 2|a2|^2))``; by
    default a ten times smaller step is used. The final step is shortened so
    that ``gt_end`` is hit exactly.
    """
    a1 = np.array([complex(sample.a1)])
    a2 = np.array([complex(sample.a2)])
    if not (np.isfinite(a1).all() and np.isfinite(a2).all()):
        raise ValueError("sample amplitudes must be finite")
    bound = step_bound(a1, a2)
    if dt is None:
        dt = step_bound(a1, a2, DEFAULT_SCALED_STEP)
    elif not (0 < dt <= bound * (1 + 1e-12)):
        raise ValueError(f"dt = {dt:g} violates the step bound {bound:g}")
    times, _, a1_out, a2_out, drift, finite, h = _integrate(a1, a2, gt_end, record_step or dt, dt, True)
    if not finite[0]:
        raise FloatingPointError("trajectory became non-finite")
    return TrajectoryRecord(times, a1_out[:, 0], a2_out[:, 0], float(drift[0]), h)


@dataclass
class TrajectoryEnsemble:
    """Integrated ensemble.

    ``pump_photons[t, j]`` is ``|a1|^2`` of trajectory ``j`` at ``times[t]``.
    ``a1``/``a2`` hold every record when ``keep_states`` was set, otherwise a
    single row with the final amplitudes.
    """

    seed: int
    alpha: complex
    n_traj: int
    times: np.ndarray
    samples_in: InputSamples
    pump_photons: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    invariant_drift: np.ndarray
    dt: float
    keep_states: bool
    backend: str = _kernels.BACKEND


def run_ensemble(
    alpha: complex,
    n_traj: int,
    gt_end: float,
    seed: int = DEFAULT_SEED,
    record_step: float | None = None,
    dt: float | None = None,
    keep_states: bool = False,
    threads: int | None = None,
    check: bool = True,
) -> TrajectoryEnsemble:
    """Sample and integrate ``n_traj`` trajectories up to ``gt_end``.

    With ``check`` set, any trajectory whose ``|a1|^2 + 2|a2|^2`` drifts by
    ``1e-8`` relative, or that goes non-finite, raises ``IntegrationGateError``.
    """
    samples = sample_inputs(seed, alpha, n_traj)
    bound = step_bound(samples.a1, samples.a2)
    if dt is None:
        dt = step_bound(samples.a1, samples.a2, DEFAULT_SCALED_STEP)
    elif not (0 < dt <= bound * (1 + 1e-12)):
        raise ValueError(f"dt = {dt:g} violates the step bound {bound:g}")

    prev = _accel.get_threads()
    _accel.set_threads(threads)
    try:
        times, n1, a1, a2, drift, finite, h = _integrate(samples.a1, samples.a2, gt_end, record_step, dt, keep_states)
    finally:
        _accel.set_threads(prev)

    if check:
        bad = np.nonzero(~finite | (drift >= DRIFT_GATE))[0]
        if bad.size:
            raise IntegrationGateError(
                f"{bad.size} of {n_traj} trajectories failed the integration gate "
                f"(max drift {np.nanmax(drift):.3g}, dt {h:.3g})",
                bad,
            )
    return TrajectoryEnsemble(
        int(seed), complex(alpha), int(n_traj), times, samples, n1, a1, a2, drift, h, keep_states
    )


@dataclass
class MeanPhoton:
    corrected: np.ndarray
    raw: np.ndarray
    stderr: np.ndarray


def ensemble_mean_photon(ensemble: TrajectoryEnsemble) -> MeanPhoton:
    """Ensemble ``<|a1|^2>`` per record, raw and minus the symmetric-ordering 1/2."""
    raw = ensemble.pump_photons.mean(axis=1)
    if ensemble.n_traj > 1:
        err = ensemble.pump_photons.std(axis=1, ddof=1) / math.sqrt(ensemble.n_traj)
    else:
        err = np.full_like(raw, np.nan)
    return MeanPhoton(raw - VACUUM_HALF, raw, err)


def final_scatter(ensemble: TrajectoryEnsemble, gt: float) -> np.ndarray:
    """Pump amplitude of every trajectory at ``gt``.

    Uses stored records when ``gt`` is on the record grid, otherwise
    re-integrates the stored input samples to exactly ``gt``.
    """
    gt = float(gt)
    t_end = ensemble.times[-1]
    if not (0.0 <= gt <= t_end * (1 + 1e-12)):
        raise ValueError(f"gt = {gt:g} outside the integrated range [0, {t_end:g}]")
    if gt == 0.0:
        return ensemble.samples_in.a1.copy()
    idx = int(np.argmin(np.abs(ensemble.times - gt)))
    on_grid = abs(ensemble.times[idx] - gt) <= 1e-12 * max(1.0, t_end)
    if on_grid and ensemble.keep_states:
        return ensemble.a1[idx].copy()
    if on_grid and idx == ensemble.times.size - 1:
        return ensemble.a1[-1].copy()
    s = ensemble.samples_in
    _, _, a1, _, _, _, _ = _integrate(s.a1, s.a2, gt, None, ensemble.dt, False)
    return a1[0]


def linearized_pump(a1: complex, a2: complex, dt: float) -> complex:
    """First-order pump amplitude after a short time.

    Writing the harmonic seed as ``a' + i a''`` this is
    ``a1 + 2i conj(a1) a' dt - 2 conj(a1) a'' dt``: the in-phase part rotates
    the pump phase, the quadrature part changes its modulus.
    """
    return complex(a1) + 2j * np.conj(a1) * complex(a2) * dt


def pump_phase_shift(a1: complex, a2: complex, gt: float) -> float:
    """Pump phase change after integrating one trajectory to ``gt``."""
    rec = integrate_trajectory(ClassicalSample(a1, a2), gt)
    return float(np.angle(rec.a1[-1] / rec.a1[0]))
