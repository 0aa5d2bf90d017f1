"""``shgcat`` command line: one subcommand per experiment.

Exit codes: 0 success, 2 configuration error, 3 numerical gate failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _accel, io
from .analysis import NoRevivalError, fit_power_law
from .experiments import SCALING_NS, classical_gt_max, quantum_series
from .hilbert import ClassicalPathRequired, build_initial_state, check_quantum_guard
from .observables import cat_fidelity, purity, reduce_pump
from .propagator import evolve, kerr_cat_overlap, kerr_evolve
from .twigner import DEFAULT_SEED, IntegrationGateError, ensemble_mean_photon, final_scatter, run_ensemble
from .wigner import default_axis, marginal_peaks, marginals, negativity, positive_lobes, wigner_grid

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


# (name, type, default, help) per subcommand; None means "not set"
COMMON = [
    ("out_dir", str, ".", "output directory"),
    ("prefix", str, None, "file name prefix (defaults to the command name)"),
    ("format", str, "csv", "csv or json"),
    ("threads", int, None, "cap on worker threads"),
]

OPTIONS = {
    "quantum": [
        ("n", float, 50.0, "initial mean pump photon number"),
        ("gt_max", float, 1.0, "end of the gt grid"),
        ("step", float, 1e-3, "gt grid step"),
        ("cutoff", float, 1e-12, "discarded Poisson tail mass"),
        ("snapshot", float, None, "also write the full state at this gt"),
        ("purity", bool, True, "include the pump purity series"),
    ],
    "wigner": [
        ("snapshot_file", str, None, "state JSON written by `quantum --snapshot`"),
        ("n", float, None, "initial mean photon number (instead of a snapshot)"),
        ("gt", float, None, "evolution time (instead of a snapshot)"),
        ("points", int, 401, "grid points per axis"),
        ("extent", float, None, "half-width of the square grid (default sqrt(n)+4)"),
        ("cutoff", float, 1e-12, "discarded Poisson tail mass"),
    ],
    "twigner": [
        ("n", float, 50.0, "initial mean pump photon number"),
        ("trajectories", int, 1000, "ensemble size"),
        ("seed", int, DEFAULT_SEED, "64-bit RNG key"),
        ("gt_max", float, 1.0, "end of integration"),
        ("step", float, 1e-3, "record spacing in gt"),
        ("dt", float, None, "RK4 step (default 0.01/sqrt(n), capped at 1e-3)"),
        ("scatter_gt", float, None, "write pump amplitudes at this gt"),
    ],
    "scaling": [
        ("ns", str, ",".join(f"{n:g}" for n in SCALING_NS), "comma-separated photon numbers"),
        ("trajectories", int, 1000, "ensemble size per n"),
        ("seed", int, DEFAULT_SEED, "64-bit RNG key"),
        ("window", int, 11, "moving-average window"),
        ("points_file", str, None, "CSV of n,gt_max pairs to fit instead of simulating"),
    ],
    "kerr": [
        ("alpha", float, 2.0, "real coherent amplitude"),
        ("alpha_imag", float, 0.0, "imaginary part of the amplitude"),
        ("phi", float, None, "nonlinear phase (default pi <n>)"),
        ("cutoff", float, 1e-12, "discarded Poisson tail mass"),
    ],
}

POSITIVE = {"gt_max", "step", "cutoff", "points", "trajectories", "dt", "extent", "window", "threads"}
NONNEGATIVE = {"n", "snapshot", "gt", "scatter_gt"}


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shgcat", description="Pump-mode cat formation in second-harmonic generation.")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, opts in OPTIONS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="JSON config or a previous output file; flags win")
        for name, typ, default, help_ in opts + COMMON:
            if typ is bool:
                sp.add_argument(_flag(name), dest=name, default=None, action=argparse.BooleanOptionalAction, help=help_)
            else:
                sp.add_argument(_flag(name), dest=name, type=typ, default=None, help=f"{help_} (default {default})")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the optional config file, then explicit flags."""
    cmd = args.command
    opts = OPTIONS[cmd] + COMMON
    cfg = {name: default for name, _, default, _ in opts}
    types = {name: typ for name, typ, _, _ in opts}
    if args.config:
        try:
            given = io.read_config_from_output(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        given = {k: v for k, v in given.items() if k != "command"}
        unknown = set(given) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in given.items():
            cfg[k] = v if v is None else types[k](v)
    for name in cfg:
        v = getattr(args, name, None)
        if v is not None:
            cfg[name] = v
    cfg["command"] = cmd
    _validate(cfg)
    return cfg


def _validate(cfg):
    for k, v in cfg.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"{k} must be finite")
        if v is None:
            continue
        if k in POSITIVE and not v > 0:
            raise ConfigError(f"{k} must be positive")
        if k in NONNEGATIVE and v < 0:
            raise ConfigError(f"{k} must be nonnegative")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")


def _path(cfg, suffix, ext=None):
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg["prefix"] or cfg["command"]
    name = stem + (f"_{suffix}" if suffix else "")
    return out / f"{name}.{ext or cfg['format']}"


def _emit(cfg, suffix, columns, rows, extra=()):
    if cfg["format"] == "json":
        data = {c: [r[i] for r in rows] for i, c in enumerate(columns)}
        if extra:
            data["notes"] = list(extra)
        return io.write_json(_path(cfg, suffix), cfg, {"columns": columns, "data": data})
    return io.write_csv(_path(cfg, suffix), cfg, columns, rows, extra)


# ---------------------------------------------------------------------------


def run_quantum(cfg) -> list[Path]:
    n = cfg["n"]
    try:
        check_quantum_guard(n)
    except ClassicalPathRequired as exc:
        raise ConfigError(f"{exc} (run `shgcat twigner`)") from exc
    res = quantum_series(n, cfg["gt_max"], cfg["step"], cfg["cutoff"], purity=cfg["purity"])
    cols = ["gt", "n1", "n2"] + (["purity"] if cfg["purity"] else [])
    rows = []
    for i, t in enumerate(res.times):
        row = [float(t), float(res.n1_series[i]), float(res.n2_series[i])]
        if cfg["purity"]:
            row.append(float(res.purity_series[i]))
        rows.append(row)
    files = [_emit(cfg, None, cols, rows)]
    if cfg["snapshot"] is not None:
        state = evolve(build_initial_state(math.sqrt(n), cfg["cutoff"]), cfg["snapshot"])
        rho = reduce_pump(state)
        doc = io.state_to_dict(state, cfg["snapshot"])
        doc["purity"] = purity(rho)
        files.append(io.write_json(_path(cfg, "snapshot", "json"), cfg, doc))
    return files


def _wigner_state(cfg):
    if cfg["snapshot_file"]:
        try:
            doc = json.loads(Path(cfg["snapshot_file"]).read_text())
            return io.state_from_dict(doc)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load snapshot {cfg['snapshot_file']}: {exc}") from exc
    if cfg["n"] is None or cfg["gt"] is None:
        raise ConfigError("wigner needs --snapshot-file or both --n and --gt")
    try:
        check_quantum_guard(cfg["n"])
    except ClassicalPathRequired as exc:
        raise ConfigError(str(exc)) from exc
    return evolve(build_initial_state(math.sqrt(cfg["n"]), cfg["cutoff"]), cfg["gt"])


def run_wigner(cfg) -> list[Path]:
    state = _wigner_state(cfg)
    rho = reduce_pump(state)
    if cfg["extent"] is not None:
        ax = np.linspace(-cfg["extent"], cfg["extent"], cfg["points"])
    else:
        ax = default_axis(rho.mean_photon, cfg["points"])
    grid = wigner_grid(rho, ax, ax)
    m = marginals(grid)
    w_min, w_neg = negativity(grid)
    lobes, cents = positive_lobes(grid)
    summary = (
        f"negativity min_value={w_min!r} negative_volume={w_neg!r} lobes={lobes} "
        f"peaks_px={marginal_peaks(m.p_x)} peaks_py={marginal_peaks(m.p_y)}"
    )
    files = []
    if cfg["format"] == "json":
        payload = {
            "x_axis": grid.x_axis,
            "y_axis": grid.y_axis,
            "shape": list(grid.values.shape),
            "values": grid.values.ravel(),
            "negativity": {"min_value": w_min, "negative_volume": w_neg},
            "lobes": [[c.real, c.imag] for c in cents],
        }
        files.append(io.write_json(_path(cfg, None), cfg, payload))
    else:
        X, Y = np.meshgrid(grid.x_axis, grid.y_axis, indexing="ij")
        rows = zip(X.ravel().tolist(), Y.ravel().tolist(), grid.values.ravel().tolist())
        files.append(io.write_csv(_path(cfg, None), cfg, ["X", "Y", "W"], rows, [summary]))
    mrows = [[float(x), float(px), float(y), float(py)] for x, px, y, py in zip(m.x, m.p_x, m.y, m.p_y)]
    files.append(_emit(cfg, "marginals", ["X", "p_X", "Y", "p_Y"], mrows, [summary]))
    print(summary)
    return files


def run_twigner(cfg) -> list[Path]:
    n = cfg["n"]
    ens = run_ensemble(
        math.sqrt(n),
        cfg["trajectories"],
        cfg["gt_max"],
        seed=cfg["seed"],
        record_step=cfg["step"],
        dt=cfg["dt"],
        threads=cfg["threads"],
    )
    mean = ensemble_mean_photon(ens)
    rows = [[float(t), float(c), float(r), float(e)] for t, c, r, e in zip(ens.times, mean.corrected, mean.raw, mean.stderr)]
    files = [_emit(cfg, "mean", ["gt", "n1_corrected", "n1_raw", "stderr"], rows)]
    if cfg["scatter_gt"] is not None:
        pts = final_scatter(ens, cfg["scatter_gt"])
        files.append(_emit(cfg, "scatter", ["index", "re_a1", "im_a1"], [[i, float(z.real), float(z.imag)] for i, z in enumerate(pts)]))
    drows = [[i, float(d)] for i, d in enumerate(ens.invariant_drift)]
    files.append(_emit(cfg, "drift", ["trajectory", "max_relative_drift"], drows, [f"rk4 dt={ens.dt!r} backend={ens.backend}"]))
    return files


def run_scaling(cfg) -> list[Path]:
    rows = []
    if cfg["points_file"]:
        _, cols, data = io.read_csv(cfg["points_file"])
        if data.ndim != 2 or data.shape[1] < 2:
            raise ConfigError("points file needs n and gt_max columns")
        points = [(float(a), float(b)) for a, b in data[:, :2]]
        rows = [[a, b, float("nan"), float("nan"), float("nan")] for a, b in points]
    else:
        try:
            ns = [float(s) for s in str(cfg["ns"]).split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --ns: {exc}") from exc
        points = []
        for n in ns:
            rev = classical_gt_max(n, cfg["trajectories"], cfg["seed"], cfg["window"], threads=cfg["threads"])
            r = rev.report
            points.append((n, r.gt_max))
            rows.append([n, r.gt_max, r.gt_min, r.n_at_max, r.ratio])
    try:
        fit = fit_power_law(points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    files = [_emit(cfg, None, ["n", "gt_max", "gt_min", "n_at_max", "ratio"], rows)]
    files.append(io.write_json(_path(cfg, "fit", "json"), cfg, fit.to_dict()))
    print(f"gt_max = {fit.coefficient:.4f}(+-{fit.coeff_stderr:.4f}) / n^{fit.exponent:.4f}(+-{fit.exp_stderr:.4f})")
    return files


def run_kerr(cfg) -> list[Path]:
    alpha = complex(cfg["alpha"], cfg["alpha_imag"])
    mean = abs(alpha) ** 2
    phi = cfg["phi"] if cfg["phi"] is not None else math.pi * mean
    try:
        ks = kerr_evolve(alpha, phi, cfg["cutoff"])
        cat = kerr_evolve(alpha, math.pi * mean, cfg["cutoff"])
    except ClassicalPathRequired as exc:
        raise ConfigError(str(exc)) from exc
    overlap = kerr_cat_overlap(cat)
    rows = [[k, float(c.real), float(c.imag), float(abs(c) ** 2)] for k, c in enumerate(ks.coeffs)]
    note = f"cat_overlap_at_pi_mean_n={overlap!r} phi_nl={phi!r}"
    print(note)
    return [_emit(cfg, None, ["n", "re", "im", "probability"], rows, [note])]


RUNNERS = {
    "quantum": run_quantum,
    "wigner": run_wigner,
    "twigner": run_twigner,
    "scaling": run_scaling,
    "kerr": run_kerr,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        _accel.set_threads(cfg["threads"])
        files = RUNNERS[cfg["command"]](cfg)
    except ConfigError as exc:
        print(f"shgcat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationGateError, NoRevivalError, FloatingPointError) as exc:
        print(f"shgcat: numerical gate failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"shgcat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f"wrote {f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
