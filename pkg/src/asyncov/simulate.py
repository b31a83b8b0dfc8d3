"""Ground-truth price paths and asynchrony schemes for benchmarking.

A correlated geometric Brownian motion provides the synchronous
baseline (one observation per second of calendar time); asynchrony is
induced either by removing a fixed fraction of grid points per asset
(missing-data representation), by reading the path at Poissonian
arrival times (arrival-time representation, with genuinely real-valued
event times), or by observing the second asset at every second trade
of the first (regular non-synchronous trading).

All draws come from Philox counter-based streams keyed on
``(seed, purpose, asset index)``, so changing the number of assets or
one asset's sampling rate never reseeds the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FactorisationError, UnderpopulatedSeriesError, ValidationError
from .tickdata import EventSeries

RNG_ALGORITHM = "philox"

_PURPOSE_GBM = 0
_PURPOSE_MISSING = 1
_PURPOSE_ARRIVALS = 2

#: reconstruction tolerance accepted from the pivoted factorisation
_PSD_TOL = 1e-10


def substream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Independent counter-based stream for one (purpose, asset) slot."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, purpose, index)))
    )


@dataclass(frozen=True, eq=False)
class GbmSpec:
    """Parameters of a correlated log-Euler price path simulation.

    ``sigma_mat`` is the covariance matrix of log-returns per unit
    interval; ``dt`` is the step size in those units (one grid step
    equals one second of calendar time regardless of ``dt``).
    """

    n: int
    mu: np.ndarray
    sigma_mat: np.ndarray
    s0: np.ndarray
    dt: float
    seed: int

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64))
        sig = np.asarray(self.sigma_mat, dtype=np.float64)
        s0 = np.atleast_1d(np.asarray(self.s0, dtype=np.float64))
        if self.n < 2:
            raise ValidationError("need n >= 2 path points")
        if sig.ndim != 2 or sig.shape[0] != sig.shape[1]:
            raise ValidationError("sigma_mat must be square")
        d = sig.shape[0]
        if mu.size != d or s0.size != d:
            raise ValidationError("mu, s0 and sigma_mat dimensions disagree")
        if not np.allclose(sig, sig.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sig).max())):
            raise ValidationError("sigma_mat must be symmetric")
        if np.any(s0 <= 0):
            raise ValidationError("start prices must be positive")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma_mat", sig)
        object.__setattr__(self, "s0", s0)

    @property
    def d(self) -> int:
        return self.sigma_mat.shape[0]


def _psd_factor(sigma_mat: np.ndarray) -> np.ndarray:
    """A with A @ A.T = sigma_mat; pivoted factorisation admits PSD input."""
    try:
        return np.linalg.cholesky(sigma_mat)
    except np.linalg.LinAlgError:
        pass
    from scipy.linalg.lapack import dpstrf

    c, piv, rank, info = dpstrf(sigma_mat, lower=1)
    if info < 0:
        raise FactorisationError("pivoted factorisation failed")
    factor = np.tril(c)
    factor[:, rank:] = 0.0
    a = np.empty_like(factor)
    a[piv - 1, :] = factor
    scale = max(1.0, float(np.abs(sigma_mat).max()))
    if np.max(np.abs(a @ a.T - sigma_mat)) > _PSD_TOL * scale:
        raise FactorisationError("sigma_mat is not positive semi-definite")
    return a


def gbm_paths(spec: GbmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Simulate the paths; returns (D x n price matrix, time grid in seconds).

    The recursion multiplies each price by
    exp[(mu - sigma^2/2) dt + sqrt(dt) * (A z)] with A a (pivoted)
    Cholesky factor, so the marginal law is exact at every step.
    """
    a = _psd_factor(spec.sigma_mat)
    rng = substream(spec.seed, _PURPOSE_GBM)
    z = rng.standard_normal((spec.n - 1, spec.d))
    drift = (spec.mu - 0.5 * np.diag(spec.sigma_mat)) * spec.dt
    log_increments = drift + math.sqrt(spec.dt) * (z @ a.T)
    cumulative = np.vstack([np.zeros(spec.d), np.cumsum(log_increments, axis=0)])
    times = np.arange(spec.n, dtype=np.float64)
    return (spec.s0 * np.exp(cumulative)).T.copy(), times


def random_covariance(d: int, seed: int, variance: float = 0.1) -> np.ndarray:
    """Random PSD covariance with positive correlations and given variances.

    A uniform(0,1) matrix U gives U @ U.T, which is rescaled to unit
    diagonal and then to the target variances. Entries are positive by
    construction.
    """
    if d < 2:
        raise ValidationError("need d >= 2")
    rng = substream(seed, _PURPOSE_GBM, 1)
    u = rng.uniform(0.0, 1.0, size=(d, d))
    raw = u @ u.T
    scale = 1.0 / np.sqrt(np.diag(raw))
    corr = raw * np.outer(scale, scale)
    return variance * corr


def _asset_ids(d: int) -> list[str]:
    return [f"A{i + 1}" for i in range(d)]


def sample_missing(
    prices: np.ndarray, times: np.ndarray, fraction: float, seed: int
) -> list[EventSeries]:
    """Remove floor(fraction*n) grid points per asset, independently.

    The first observation is always kept so every asset shares the
    panel origin. Remaining (time, price) pairs are untouched.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValidationError(f"fraction must lie in [0, 1), got {fraction}")
    prices = np.atleast_2d(prices)
    d, n = prices.shape
    n_remove = int(math.floor(fraction * n))
    if n - n_remove < 2:
        raise UnderpopulatedSeriesError(
            f"removing {n_remove} of {n} points leaves fewer than 2"
        )
    out = []
    for i, asset in enumerate(_asset_ids(d)):
        rng = substream(seed, _PURPOSE_MISSING, i)
        removed = rng.choice(np.arange(1, n), size=n_remove, replace=False)
        keep = np.ones(n, dtype=bool)
        keep[removed] = False
        out.append(EventSeries(asset, times[keep], prices[i, keep]))
    return out


def sample_arrivals(
    prices: np.ndarray, times: np.ndarray, lam, seed: int
) -> list[EventSeries]:
    """Read each path at Poissonian arrival times (previous tick).

    Arrival clocks start at 0 and accumulate Exp(lambda_i) inter-arrival
    draws until the grid horizon is passed. Event times are the
    real-valued arrival times themselves — they do not sit on the grid,
    which is exactly what defeats grid-snapping transforms. Values are
    read from the latest grid point at or before each arrival.
    """
    prices = np.atleast_2d(prices)
    d, n = prices.shape
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (d,))
    if np.any(lam <= 0):
        raise ValidationError("arrival rates must be positive")
    horizon = float(times[-1])
    out = []
    for i, asset in enumerate(_asset_ids(d)):
        rng = substream(seed, _PURPOSE_ARRIVALS, i)
        chunk = max(16, int(horizon * lam[i] * 1.2) + 32)
        arrivals = [0.0]
        t = 0.0
        while t <= horizon:
            gaps = rng.exponential(1.0 / lam[i], size=chunk)
            cum = t + np.cumsum(gaps)
            arrivals.extend(cum[cum <= horizon].tolist())
            t = float(cum[-1])
        arr = np.array(arrivals)
        if arr.size < 2:
            raise UnderpopulatedSeriesError(
                f"asset {asset!r}: first arrival beyond the horizon {horizon}"
            )
        idx = np.searchsorted(times, arr, side="right") - 1
        out.append(EventSeries(asset, arr, prices[i, idx]))
    return out


def regular_nonsynchronous(
    prices: np.ndarray, times: np.ndarray
) -> list[EventSeries]:
    """Asset 1 keeps every trade; asset 2 is observed at every second one.

    Both assets share the first observation, so the panel origin is
    common.
    """
    prices = np.atleast_2d(prices)
    if prices.shape[0] < 2:
        raise ValidationError("need at least two assets")
    ids = _asset_ids(prices.shape[0])
    return [
        EventSeries(ids[0], times, prices[0]),
        EventSeries(ids[1], times[::2], prices[1, ::2]),
    ]
