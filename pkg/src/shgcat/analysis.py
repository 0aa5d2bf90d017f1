"""Depletion/revival extrema and the gt_max scaling fit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats


class NoRevivalError(ValueError):
    """The series has no interior minimum followed by a maximum."""


@dataclass(frozen=True)
class ExtremumReport:
    gt_min: float
    gt_max: float
    n_at_max: float
    ratio: float
    index_max: int = -1


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    exponent: float
    coeff_stderr: float
    exp_stderr: float
    points: list = field(default_factory=list)

    def predict(self, n):
        return self.coefficient * np.asarray(n, dtype=float) ** (-self.exponent)

    def to_dict(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "coeff_stderr": self.coeff_stderr,
            "exp_stderr": self.exp_stderr,
            "points": [[float(n), float(g)] for n, g in self.points],
        }


def moving_average(series, window: int) -> np.ndarray:
    """Centred moving average; the window shrinks symmetrically at the ends."""
    y = np.asarray(series, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if window > y.size:
        raise ValueError("window larger than series")
    h = window // 2
    c = np.concatenate(([0.0], np.cumsum(y)))
    i = np.arange(y.size)
    half = np.minimum(np.minimum(i, y.size - 1 - i), h)
    return (c[i + half + 1] - c[i - half]) / (2 * half + 1)


def _parabolic_vertex(t, y, i):
    """Vertex of the parabola through points ``i-1, i, i+1`` (uniform grid)."""
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    den = ym - 2.0 * y0 + yp
    if den == 0:
        return t[i]
    shift = 0.5 * (ym - yp) / den
    shift = min(max(shift, -1.0), 1.0)
    return t[i] + shift * (t[1] - t[0])


def find_gt_max(times, series, window: int = 11, n_initial: float | None = None) -> ExtremumReport:
    """First maximum of ``series`` after its first interior minimum.

    The series is smoothed by a centred moving average, the first strict
    local minimum and the first strict local maximum after it are located,
    and the maximum is refined by a three-point parabola. ``n_at_max`` is the
    raw series linearly interpolated at the refined time.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and series must be 1-d and of equal length")
    if t.size < 3:
        raise NoRevivalError("series too short")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
        raise ValueError("times must be uniformly spaced")
    s = moving_average(y, window)
    interior = np.arange(1, s.size - 1)
    is_min = (s[interior] < s[interior - 1]) & (s[interior] < s[interior + 1])
    mins = interior[is_min]
    if mins.size == 0:
        raise NoRevivalError("no depletion-revival cycle in range")
    i_min = mins[0]
    after = interior[interior > i_min]
    is_max = (s[after] > s[after - 1]) & (s[after] > s[after + 1])
    maxs = after[is_max]
    if maxs.size == 0:
        raise NoRevivalError("no depletion-revival cycle in range")
    i_max = maxs[0]
    gt_max = _parabolic_vertex(t, s, i_max)
    n_at_max = float(np.interp(gt_max, t, y))
    n0 = float(y[0]) if n_initial is None else float(n_initial)
    ratio = n_at_max / n0 if n0 > 0 else float("nan")
    return ExtremumReport(float(t[i_min]), float(gt_max), n_at_max, ratio, int(i_max))


def conversion_ratio(report: ExtremumReport, n_initial: float) -> float:
    if not n_initial > 0:
        raise ValueError("n_initial must be positive")
    return report.n_at_max / n_initial


def fit_power_law(points) -> PowerLawFit:
    """Least-squares line through ``(log n, log gt_max)``: ``gt_max = C n^(-p)``."""
    pts = [(float(n), float(g)) for n, g in points]
    if len(pts) < 3:
        raise ValueError("at least 3 points are needed")
    arr = np.array(pts)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("points must be positive and finite")
    if np.unique(arr[:, 0]).size < 2:
        raise ValueError("need at least two distinct n values")
    res = stats.linregress(np.log(arr[:, 0]), np.log(arr[:, 1]))
    coeff = float(np.exp(res.intercept))
    return PowerLawFit(
        coefficient=coeff,
        exponent=float(-res.slope),
        coeff_stderr=float(coeff * res.intercept_stderr),
        exp_stderr=float(res.stderr),
        points=pts,
    )
