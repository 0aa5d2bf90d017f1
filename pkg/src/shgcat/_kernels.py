"""Hot loops: RK4 ensemble integration and the Fock-basis Wigner sum.

Each kernel exists twice, a numba version (``*_nb``) and a vectorised numpy
version (``*_np``). The public names point at one of them depending on
``shgcat._accel.USE_NUMBA``. Both are kept importable for the benchmark.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange

# rescale threshold for the Laguerre recurrence
_BIG = 1e150
_LOG_BIG = math.log(_BIG)


# ---------------------------------------------------------------------------
# classical SHG equations, RK4
# ---------------------------------------------------------------------------


@njit(cache=True)
def _rhs(xr, xi, yr, yi):
    # 2i y conj(x), i x^2 in real arithmetic
    pr = yr * xr + yi * xi
    pi_ = yi * xr - yr * xi
    return -2.0 * pi_, 2.0 * pr, -2.0 * xr * xi, xr * xr - xi * xi


@njit(cache=True)
def _rk4_step(x, y, h):
    xr, xi, yr, yi = x.real, x.imag, y.real, y.imag
    h2 = 0.5 * h
    a1, b1, c1, d1 = _rhs(xr, xi, yr, yi)
    a2, b2, c2, d2 = _rhs(xr + h2 * a1, xi + h2 * b1, yr + h2 * c1, yi + h2 * d1)
    a3, b3, c3, d3 = _rhs(xr + h2 * a2, xi + h2 * b2, yr + h2 * c2, yi + h2 * d2)
    a4, b4, c4, d4 = _rhs(xr + h * a3, xi + h * b3, yr + h * c3, yi + h * d3)
    h6 = h / 6.0
    xr += h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    xi += h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    yr += h6 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    yi += h6 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    return complex(xr, xi), complex(yr, yi)


@njit(parallel=True, cache=True)
def rk4_ensemble_nb(a1, a2, h, n_records, sub, keep, n1_out, a1_out, a2_out, drift, finite):
    n_traj = a1.shape[0]
    for j in prange(n_traj):
        x = a1[j]
        y = a2[j]
        inv0 = x.real * x.real + x.imag * x.imag + 2.0 * (y.real * y.real + y.imag * y.imag)
        n1_out[0, j] = x.real * x.real + x.imag * x.imag
        if keep:
            a1_out[0, j] = x
            a2_out[0, j] = y
        worst = 0.0
        ok = True
        for r in range(1, n_records + 1):
            for _ in range(sub):
                x, y = _rk4_step(x, y, h)
            p1 = x.real * x.real + x.imag * x.imag
            inv = p1 + 2.0 * (y.real * y.real + y.imag * y.imag)
            if not (math.isfinite(inv)):
                ok = False
            d = abs(inv - inv0) / inv0 if inv0 > 0.0 else abs(inv)
            if d > worst:
                worst = d
            n1_out[r, j] = p1
            if keep:
                a1_out[r, j] = x
                a2_out[r, j] = y
        if not keep:
            a1_out[0, j] = x
            a2_out[0, j] = y
        drift[j] = worst
        finite[j] = ok


def rk4_ensemble_np(a1, a2, h, n_records, sub, keep, n1_out, a1_out, a2_out, drift, finite):
    x = a1.copy()
    y = a2.copy()
    inv0 = np.abs(x) ** 2 + 2.0 * np.abs(y) ** 2
    safe = np.where(inv0 > 0.0, inv0, 1.0)
    n1_out[0] = x.real**2 + x.imag**2
    if keep:
        a1_out[0] = x
        a2_out[0] = y
    drift[:] = 0.0
    finite[:] = True
    for r in range(1, n_records + 1):
        for _ in range(sub):
            k1x = 2j * y * np.conj(x)
            k1y = 1j * x * x
            xm = x + 0.5 * h * k1x
            ym = y + 0.5 * h * k1y
            k2x = 2j * ym * np.conj(xm)
            k2y = 1j * xm * xm
            xm = x + 0.5 * h * k2x
            ym = y + 0.5 * h * k2y
            k3x = 2j * ym * np.conj(xm)
            k3y = 1j * xm * xm
            xm = x + h * k3x
            ym = y + h * k3y
            k4x = 2j * ym * np.conj(xm)
            k4y = 1j * xm * xm
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p1 = x.real**2 + x.imag**2
        inv = p1 + 2.0 * (y.real**2 + y.imag**2)
        finite &= np.isfinite(inv)
        d = np.where(inv0 > 0.0, np.abs(inv - inv0) / safe, np.abs(inv))
        np.maximum(drift, d, out=drift)
        n1_out[r] = p1
        if keep:
            a1_out[r] = x
            a2_out[r] = y
    if not keep:
        a1_out[0] = x
        a2_out[0] = y


# ---------------------------------------------------------------------------
# Wigner function from a Fock density matrix
# ---------------------------------------------------------------------------
#
# For m = n + d the |m><n| kernel is
#     (2/pi) (-1)^n exp(-i d theta) l_n^d(4|alpha|^2)
# with the normalised Laguerre function
#     l_n^d(x) = sqrt(n!/(n+d)!) x^(d/2) exp(-x/2) L_n^d(x),
# evaluated upward in n with a running log-scale.


@njit(cache=True)
def _wigner_tables(rho):
    """Signed diagonals ``(-1)^n rho[n+d, n]`` and recurrence coefficients per (d, n)."""
    dim = rho.shape[0]
    rs = np.zeros((dim, dim), dtype=np.complex128)
    c0 = np.zeros((dim, dim))
    c1 = np.zeros((dim, dim))
    inv = np.zeros((dim, dim))
    for d in range(dim):
        for n in range(dim - d):
            rs[d, n] = rho[n + d, n] if n % 2 == 0 else -rho[n + d, n]
            if n > 0:
                nm1 = n - 1
                inv[d, n] = 1.0 / math.sqrt((nm1 + 1.0) * (nm1 + d + 1.0))
                c0[d, n] = 2.0 * nm1 + d + 1.0
                c1[d, n] = math.sqrt(nm1 * (nm1 + d + 0.0))
    return rs, c0, c1, inv


@njit(cache=True)
def _wigner_point(rs, c0, c1, inv, lgam, xr, yr):
    dim = rs.shape[0]
    x4 = 4.0 * (xr * xr + yr * yr)
    theta = math.atan2(yr, xr)
    rot = complex(math.cos(theta), -math.sin(theta))
    phase = 1.0 + 0.0j
    logx = math.log(x4) if x4 > 0.0 else 0.0
    total = 0.0
    for d in range(dim):
        if d == 0:
            lsc = -0.5 * x4
        elif x4 > 0.0:
            lsc = 0.5 * d * logx - 0.5 * x4 - 0.5 * lgam[d]
        else:
            break
        prev = 0.0
        cur = 1.0
        acc = rs[d, 0]
        out = 0.0 + 0.0j
        for n in range(1, dim - d):
            nxt = ((c0[d, n] - x4) * cur - c1[d, n] * prev) * inv[d, n]
            prev = cur
            cur = nxt
            if abs(cur) > _BIG:
                out += acc * math.exp(lsc)
                acc = 0.0 + 0.0j
                cur /= _BIG
                prev /= _BIG
                lsc += _LOG_BIG
            acc += rs[d, n] * cur
        out += acc * math.exp(lsc)
        if d == 0:
            total += out.real
        else:
            total += 2.0 * (phase * out).real
        phase *= rot
    return total * 2.0 / math.pi


@njit(parallel=True, cache=True)
def wigner_nb(rho, lgam, xs, ys, out):
    rs, c0, c1, inv = _wigner_tables(rho)
    nx = xs.shape[0]
    ny = ys.shape[0]
    for i in prange(nx):
        for j in range(ny):
            out[i, j] = _wigner_point(rs, c0, c1, inv, lgam, xs[i], ys[j])


def wigner_np(rho, lgam, xs, ys, out):
    dim = rho.shape[0]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    x4 = 4.0 * (X * X + Y * Y)
    rot = np.exp(-1j * np.arctan2(Y, X))
    with np.errstate(divide="ignore"):
        logx = np.log(x4)
    phase = np.ones_like(rot)
    total = np.zeros_like(x4)
    for d in range(dim):
        if d == 0:
            lsc = -0.5 * x4
        else:
            lsc = np.where(x4 > 0.0, 0.5 * d * logx - 0.5 * x4 - 0.5 * lgam[d], -np.inf)
        scale = np.exp(lsc)
        prev = np.zeros_like(x4)
        cur = np.ones_like(x4)
        acc = np.zeros(x4.shape, dtype=complex)
        sign = 1.0
        for n in range(dim - d):
            if n > 0:
                nm1 = n - 1
                nxt = ((2 * nm1 + d + 1 - x4) * cur - math.sqrt(nm1 * (nm1 + d)) * prev) / math.sqrt(
                    (nm1 + 1.0) * (nm1 + d + 1.0)
                )
                prev, cur = cur, nxt
                big = np.abs(cur) > _BIG
                if big.any():
                    cur = np.where(big, cur / _BIG, cur)
                    prev = np.where(big, prev / _BIG, prev)
                    lsc = np.where(big, lsc + _LOG_BIG, lsc)
                    scale = np.exp(lsc)
            acc += sign * rho[n + d, n] * (cur * scale)
            sign = -sign
        if d == 0:
            total += acc.real
        else:
            total += 2.0 * (phase * acc).real
        phase = phase * rot
    out[:] = total * 2.0 / math.pi


if USE_NUMBA:
    rk4_ensemble = rk4_ensemble_nb
    wigner_kernel = wigner_nb
else:
    rk4_ensemble = rk4_ensemble_np
    wigner_kernel = wigner_np

BACKEND = "numba" if USE_NUMBA else "numpy"
