"""Wigner function of the pump mode, its marginals and negativity.

Phase-space coordinates are ``alpha = X + iY`` with ``X = (a + a^+)/2``, the
same units as the classical amplitudes, so vacuum is
``W = (2/pi) exp(-2 (X^2 + Y^2))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal
from scipy.special import gammaln

from . import _kernels
from .observables import DensityMatrix

DEFAULT_POINTS = 401


@dataclass(frozen=True)
class WignerGrid:
    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray  # values[i, j] = W(x_axis[i], y_axis[j])

    @property
    def dx(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0]) if self.x_axis.size > 1 else 1.0

    @property
    def dy(self) -> float:
        return float(self.y_axis[1] - self.y_axis[0]) if self.y_axis.size > 1 else 1.0

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, dx=self.dy, axis=1), dx=self.dx))


@dataclass(frozen=True)
class Marginals:
    x: np.ndarray
    p_x: np.ndarray
    y: np.ndarray
    p_y: np.ndarray


def _check_axis(ax, name):
    ax = np.asarray(ax, dtype=float)
    if ax.ndim != 1 or ax.size < 2:
        raise ValueError(f"{name} needs at least two points")
    d = np.diff(ax)
    if np.any(d <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if not np.allclose(d, d[0], rtol=1e-8, atol=0.0):
        raise ValueError(f"{name} spacing is not uniform")
    return ax


def default_axis(mean_photons: float, points: int = DEFAULT_POINTS) -> np.ndarray:
    half = np.sqrt(max(mean_photons, 0.0)) + 4.0
    return np.linspace(-half, half, points)


def _trim(rho: np.ndarray, tol: float = 1e-20) -> np.ndarray:
    diag = np.abs(np.diag(rho))
    keep = np.nonzero(diag > tol)[0]
    dim = int(keep[-1]) + 1 if keep.size else 1
    return rho[:dim, :dim]


def wigner_grid(rho: DensityMatrix, x_axis, y_axis) -> WignerGrid:
    """Evaluate ``W(X, Y) = sum_mn rho_mn W_mn(X, Y)`` on a rectangular grid.

    Each off-diagonal pair ``(m, n), (n, m)`` enters as ``2 Re``, so the sum is
    real by construction. Empty top levels of ``rho`` are dropped first.
    """
    xs = _check_axis(x_axis, "x_axis")
    ys = _check_axis(y_axis, "y_axis")
    r = np.ascontiguousarray(_trim(rho.elements))
    lgam = gammaln(np.arange(r.shape[0], dtype=float) + 1.0)  # lgam[d] = ln d!
    out = np.empty((xs.size, ys.size))
    _kernels.wigner_kernel(r, lgam, xs, ys, out)
    return WignerGrid(xs, ys, out)


def marginals(grid: WignerGrid) -> Marginals:
    """``p(X) = int W dY`` and ``p(Y) = int W dX`` by the trapezoidal rule."""
    p_x = np.trapezoid(grid.values, dx=grid.dy, axis=1)
    p_y = np.trapezoid(grid.values, dx=grid.dx, axis=0)
    return Marginals(grid.x_axis, p_x, grid.y_axis, p_y)


def negativity(grid: WignerGrid) -> tuple[float, float]:
    """Minimum of W and the volume of its negative part."""
    w = grid.values
    neg = np.abs(w[w < 0]).sum() * grid.cell_area
    return float(w.min()), float(neg)


def positive_lobes(grid: WignerGrid, level: float = 0.5):
    """Connected regions where W exceeds ``level`` times its maximum.

    Returns ``(count, centroids)``; centroids are complex ``X + iY``.
    """
    w = grid.values
    mask = w > level * w.max()
    labels, count = ndimage.label(mask)
    cms = ndimage.center_of_mass(np.where(mask, w, 0.0), labels, range(1, count + 1))
    ix = np.arange(grid.x_axis.size)
    iy = np.arange(grid.y_axis.size)
    cents = [complex(np.interp(i, ix, grid.x_axis), np.interp(j, iy, grid.y_axis)) for i, j in cms]
    return count, cents


def marginal_peaks(p: np.ndarray, rel_prominence: float = 0.05) -> int:
    """Number of local maxima of a marginal whose prominence exceeds a fraction of its peak."""
    peaks, _ = signal.find_peaks(p, prominence=rel_prominence * float(np.max(p)))
    return int(peaks.size)


def purity_from_wigner(grid: WignerGrid) -> float:
    """``Tr rho^2 = pi int W^2 dX dY`` in these units."""
    w2 = grid.values**2
    return float(np.pi * np.trapezoid(np.trapezoid(w2, dx=grid.dy, axis=1), dx=grid.dx))
