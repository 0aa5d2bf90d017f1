"""Numba vs pure-numpy timings for the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are called directly, independent of SHGCAT_DISABLE_NUMBA.
The first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np
from scipy.special import gammaln

from shgcat import _kernels
from shgcat.hilbert import build_initial_state
from shgcat.observables import reduce_pump
from shgcat.propagator import evolve
from shgcat.twigner import sample_inputs, step_bound
from shgcat.wigner import _trim


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_rk4(n, n_traj, repeat):
    s = sample_inputs(1, np.sqrt(n), n_traj)
    h = step_bound(s.a1, s.a2, 0.01)
    n_records, sub = 200, 5

    def run(kernel):
        n1 = np.empty((n_records + 1, n_traj))
        a1 = np.empty((1, n_traj), dtype=complex)
        a2 = np.empty((1, n_traj), dtype=complex)
        drift = np.empty(n_traj)
        fin = np.empty(n_traj, dtype=np.bool_)
        kernel(s.a1, s.a2, h, n_records, sub, False, n1, a1, a2, drift, fin)
        return n1

    run(_kernels.rk4_ensemble_nb)
    t_nb = best_of(lambda: run(_kernels.rk4_ensemble_nb), repeat)
    t_np = best_of(lambda: run(_kernels.rk4_ensemble_np), repeat)
    diff = np.max(np.abs(run(_kernels.rk4_ensemble_nb) - run(_kernels.rk4_ensemble_np)))
    return t_nb, t_np, diff


def bench_wigner(n, gt, points, repeat):
    rho = np.ascontiguousarray(_trim(reduce_pump(evolve(build_initial_state(np.sqrt(n)), gt)).elements))
    lgam = gammaln(np.arange(rho.shape[0]) + 1.0)
    ax = np.linspace(-np.sqrt(n) - 4, np.sqrt(n) + 4, points)
    out_nb = np.empty((points, points))
    out_np = np.empty((points, points))
    _kernels.wigner_nb(rho, lgam, ax[:3], ax[:3], out_nb[:3, :3].copy())
    t_nb = best_of(lambda: _kernels.wigner_nb(rho, lgam, ax, ax, out_nb), repeat)
    t_np = best_of(lambda: _kernels.wigner_np(rho, lgam, ax, ax, out_np), repeat)
    return t_nb, t_np, float(np.max(np.abs(out_nb - out_np))), rho.shape[0]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    print(f"{'kernel':<34}{'numba [s]':>11}{'numpy [s]':>11}{'speedup':>9}{'max |diff|':>12}")
    for n, n_traj in [(50, 1000), (1e4, 1000), (1e4, 10000)]:
        t_nb, t_np, d = bench_rk4(n, n_traj, args.repeat)
        label = f"rk4 n={n:g} traj={n_traj} steps=1000"
        print(f"{label:<34}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}{d:>12.2e}")
    for n, gt, pts in [(50, 0.463, 101), (100, 0.352, 101)]:
        t_nb, t_np, d, dim = bench_wigner(n, gt, pts, args.repeat)
        label = f"wigner n={n} dim={dim} grid={pts}^2"
        print(f"{label:<34}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}{d:>12.2e}")


if __name__ == "__main__":
    main()
