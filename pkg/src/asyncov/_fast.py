"""Compiled inner loops shared by the Fourier engines.

Everything here is deliberately scalar-loop numba code: the direct
engines are quadratic-cost reference implementations whose cost model
must stay honest, and the spreading loops mirror the kernel-specific
gridding algorithms step for step (0-based indices, wrap-around at the
grid edges). Parallel loops only ever parallelise over output slots,
so results are bit-reproducible regardless of thread count.
"""

from __future__ import annotations

import math
import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numpy as np
from numba import cfunc, njit, prange, types


@njit(cache=True, parallel=True)
def direct_coeffs(times, deltas, n_cutoff):
    """Plain double-loop evaluation of sum_h delta_h * e^{i k t_h} for
    k = -N..N (index 0 holds k = -N)."""
    m = 2 * n_cutoff + 1
    n = times.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for s in prange(m):
        k = s - n_cutoff
        re = 0.0
        im = 0.0
        for h in range(n):
            th = k * times[h]
            re += deltas[h] * math.cos(th)
            im += deltas[h] * math.sin(th)
        out[s] = complex(re, im)
    return out


@njit(cache=True, parallel=True)
def negative_mode_coeffs(times, deltas, n_cutoff):
    """sum_h delta_h * e^{-i k t_h} for k = 1..N only (index 0 holds k = 1);
    the positive modes follow by conjugation for real deltas."""
    n = times.shape[0]
    out = np.empty(n_cutoff, dtype=np.complex128)
    for s in prange(n_cutoff):
        k = s + 1
        re = 0.0
        im = 0.0
        for h in range(n):
            th = k * times[h]
            re += deltas[h] * math.cos(th)
            im -= deltas[h] * math.sin(th)
        out[s] = complex(re, im)
    return out


@njit(cache=True)
def spread_gaussian(times, deltas, grid, m_sp, t1):
    """Fast Gaussian gridding: two exponential evaluations per source.

    The Gaussian weight exp(-t1*(d - k)^2) for grid offsets
    k = -m_sp+1 .. m_sp is split into exp(-t1*d^2) * exp(2*t1*d)^k *
    exp(-t1*k^2); the last factor is tabulated once per call.
    """
    m_r = grid.shape[0]
    hx = 2.0 * math.pi / m_r
    e3 = np.empty(m_sp, dtype=np.float64)
    for j in range(1, m_sp + 1):
        e3[j - 1] = math.exp(-t1 * j * j)
    for h in range(times.shape[0]):
        x = times[h] / hx
        b0 = int(x)
        if b0 > m_r - 1:
            b0 = m_r - 1
        d = x - b0
        e1 = math.exp(-t1 * d * d)
        e2 = math.exp(2.0 * t1 * d)
        amp = deltas[h]
        # offset 0
        grid[b0] += amp * e1
        # positive offsets 1 .. m_sp
        w2 = 1.0
        for k in range(1, m_sp + 1):
            w2 *= e2
            idx = b0 + k
            if idx >= m_r:
                idx -= m_r
            grid[idx] += amp * e1 * w2 * e3[k - 1]
        # negative offsets -1 .. -(m_sp - 1)
        e2inv = 1.0 / e2
        w2 = 1.0
        for k in range(1, m_sp):
            w2 *= e2inv
            idx = b0 - k
            if idx < 0:
                idx += m_r
            grid[idx] += amp * e1 * w2 * e3[k - 1]


@njit(cache=True)
def kaiser_bessel_weight(x, m_sp, b, m_r):
    """Sinh-form Kaiser-Bessel window at distance x (domain units, period 1).

    The sqrt argument changes sign at the window edge |x| = m_sp/m_r;
    a series guard at |argument| < 1e-8 avoids 0/0 right on the edge.
    """
    s2 = m_sp * m_sp - (m_r * x) * (m_r * x)
    if s2 > 1e-8:
        s = math.sqrt(s2)
        return math.sinh(b * s) / (math.pi * s)
    if s2 < -1e-8:
        s = math.sqrt(-s2)
        return math.sin(b * s) / (math.pi * s)
    return b / math.pi


@njit(cache=True)
def spread_kaiser_bessel(times, deltas, grid, m_sp, b):
    """Spread onto the 1-periodic grid with on-the-fly window evaluation."""
    m_r = grid.shape[0]
    for h in range(times.shape[0]):
        x = times[h] * m_r
        b0 = int(x)
        if b0 > m_r - 1:
            b0 = m_r - 1
        d = times[h] - b0 / m_r
        amp = deltas[h]
        for k in range(-m_sp, m_sp + 1):
            idx = b0 + k
            if idx < 0:
                idx += m_r
            elif idx >= m_r:
                idx -= m_r
            grid[idx] += amp * kaiser_bessel_weight(d - k / m_r, m_sp, b, m_r)


@njit(cache=True)
def exp_semicircle_weight(x, beta, alpha):
    """Exponential-of-semicircle window rescaled to support [-alpha, alpha]."""
    u = x / alpha
    q = 1.0 - u * u
    if q < 0.0:
        return 0.0
    return math.exp(beta * (math.sqrt(q) - 1.0))


@njit(cache=True)
def spread_exp_semicircle(times, deltas, grid, m_sp, beta, alpha):
    """Spread onto the 2*pi-periodic grid with on-the-fly window evaluation."""
    m_r = grid.shape[0]
    hx = 2.0 * math.pi / m_r
    for h in range(times.shape[0]):
        x = times[h] / hx
        b0 = int(x)
        if b0 > m_r - 1:
            b0 = m_r - 1
        d = times[h] - b0 * hx
        amp = deltas[h]
        for k in range(-m_sp, m_sp + 1):
            idx = b0 + k
            if idx < 0:
                idx += m_r
            elif idx >= m_r:
                idx -= m_r
            grid[idx] += amp * exp_semicircle_weight(d - k * hx, beta, alpha)


@cfunc(types.float64(types.intc, types.CPointer(types.float64)), cache=True)
def _es_transform_integrand(n_args, args):
    # args: x, beta, y -> phi_ES(x) * cos(y * x) on [0, 1]
    x = args[0]
    beta = args[1]
    y = args[2]
    return math.exp(beta * (math.sqrt(1.0 - x * x) - 1.0)) * math.cos(y * x)


es_transform_integrand_ctypes = _es_transform_integrand.ctypes
