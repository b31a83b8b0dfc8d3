import cmath
import math
from pathlib import Path

import numpy as np
import pytest

from asyncov.tickdata import ReturnSeries

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- oracles
# Independent reference implementations, written before the engines they
# check and kept deliberately naive.

def oracle_coeffs(times, deltas, n_cutoff):
    """Brute-force modes sum_h delta_h e^{i k t_h}, k = -N..N, via cmath."""
    out = np.empty(2 * n_cutoff + 1, dtype=complex)
    for idx, k in enumerate(range(-n_cutoff, n_cutoff + 1)):
        acc = 0j
        for t, d in zip(times, deltas):
            acc += d * cmath.exp(1j * k * t)
        out[idx] = acc
    return out


def oracle_dft(grid):
    """Quadratic DFT: bin m = sum_l grid_l e^{-2 pi i m l / L}."""
    grid = np.asarray(grid)
    L = grid.size
    out = np.empty(L, dtype=complex)
    for m in range(L):
        acc = 0j
        for l, g in enumerate(grid):
            acc += g * cmath.exp(-2j * math.pi * m * l / L)
        out[m] = acc
    return out


def oracle_integrated_covariance(ti, di, tj, dj, n_cutoff, basis="dirichlet"):
    """Triple loop over (mode, h, l) of the weighted double sum."""
    total = 0j
    for s in range(-n_cutoff, n_cutoff + 1):
        if basis == "dirichlet":
            w = 1.0 / (2 * n_cutoff + 1)
        else:
            w = (1.0 - abs(s) / n_cutoff) / (n_cutoff + 1)
        for th, dh in zip(ti, di):
            for tl, dl in zip(tj, dj):
                total += w * cmath.exp(1j * s * (tl - th)) * dh * dl
    return total.real


def random_return_series(seed, n=64, scale=0.01, asset_id="X"):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0.0, TWO_PI, n))
    t[0] = 0.0
    t[-1] = min(t[-1], np.nextafter(TWO_PI, 0.0))
    return ReturnSeries(asset_id, t, rng.normal(0.0, scale, n))


@pytest.fixture
def taq3_path():
    return FIXTURES / "taq3_long.csv"
