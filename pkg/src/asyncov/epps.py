"""Time-scale analysis: theoretical Epps curve, dt sweeps, block bootstrap.

The sampling interval dt maps to a mode cutoff through
N = floor((T/dt - 1)/2), so sweeping dt sweeps the time scale the
estimator investigates. For Poissonian sampling the asynchrony-driven
correlation decay has the closed form implemented by
:func:`epps_theoretical`, which the simulated sweeps are checked
against. Error bars follow the spread convention: a central t-quantile
times the cross-replicate standard deviation, i.e. they show the
variability between estimated paths, not the standard error of the
mean (pass ``error_scale="mean"`` for the latter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import UnderpopulatedSeriesError, ValidationError
from .estimator import EstimatorConfig, asset_coefficients, dt_to_n, integrated_covariance
from .tickdata import EventSeries, log_returns, rescale_times


@dataclass(frozen=True, eq=False)
class EppsCurve:
    """Mean correlation and error-bar half-width per sampling interval."""

    pair: tuple[str, str]
    dt_values: np.ndarray
    rho_mean: np.ndarray
    rho_err: np.ndarray
    basis: str
    replications: int


def epps_theoretical(c: float, lam: float, dt: float) -> float:
    """Correlation measured at scale dt under Poissonian sampling.

    c * (1 + (exp(-lam*dt) - 1) / (lam*dt)); tends to c as dt grows and
    to 0 as dt shrinks.
    """
    if lam <= 0 or dt <= 0:
        raise ValidationError("lam and dt must be positive")
    x = lam * dt
    return c * (1.0 + (math.exp(-x) - 1.0) / x)


def _check_dt_grid(dt_values) -> np.ndarray:
    dts = np.asarray(dt_values, dtype=np.float64).reshape(-1)
    if dts.size == 0:
        raise ValidationError("need at least one dt")
    if np.any(np.diff(dts) <= 0):
        raise ValidationError("dt values must be strictly increasing")
    return dts


def _pairwise_correlations(
    events: list[EventSeries],
    dts: np.ndarray,
    config: EstimatorConfig,
    t_min: float | None = None,
    t_max: float | None = None,
) -> tuple[list[tuple[str, str]], np.ndarray]:
    """Correlations for every pair at every dt, sharing one coefficient set.

    Coefficients are computed once per asset at the largest cutoff
    (smallest dt); smaller cutoffs reuse the central modes, which are
    the same quantities whatever the cutoff.
    """
    panel = rescale_times(events, t_min=t_min, t_max=t_max)
    returns = [log_returns(s, panel) for s in events]
    span = panel.t_span
    cutoffs = [dt_to_n(span, dt) for dt in dts]
    n_max = max(cutoffs)
    coeffs = [asset_coefficients(rs, n_max, config) for rs in returns]
    d = len(events)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    out = np.empty((len(pairs), dts.size))
    for col, n in enumerate(cutoffs):
        var = [integrated_covariance(c, c, n, config.basis) for c in coeffs]
        for row, (i, j) in enumerate(pairs):
            cov = integrated_covariance(coeffs[i], coeffs[j], n, config.basis)
            denom = math.sqrt(var[i] * var[j])
            out[row, col] = cov / denom if denom > 0 else np.nan
    labels = [(events[i].asset_id, events[j].asset_id) for i, j in pairs]
    return labels, out


def _halfwidth(samples: np.ndarray, confidence: float, error_scale: str) -> np.ndarray:
    reps = samples.shape[0]
    if reps < 2:
        return np.zeros(samples.shape[1])
    q = stats.t.ppf(0.5 + confidence / 2.0, reps - 1)
    sd = np.std(samples, axis=0, ddof=1)
    if error_scale == "mean":
        sd = sd / math.sqrt(reps)
    return q * sd


def epps_curve(
    data: list[EventSeries] | Callable[[int], list[EventSeries]],
    dt_values: Sequence[float],
    config: EstimatorConfig,
    replications: int = 1,
    confidence: float = 0.68,
    error_scale: str = "spread",
) -> list[EppsCurve]:
    """Correlation as a function of the sampling interval, per asset pair.

    Parameters
    ----------
    data : list of EventSeries, or callable rep -> list of EventSeries
        Fixed empirical data (replications must be 1) or a simulation
        source invoked once per replicate.
    dt_values : strictly increasing sampling intervals (seconds).
    config : EstimatorConfig
        Engine and basis; the mode policy is overridden per dt.
    replications, confidence, error_scale
        Replicate count and error-bar convention (see module docstring).
    """
    dts = _check_dt_grid(dt_values)
    if error_scale not in ("spread", "mean"):
        raise ValidationError("error_scale must be 'spread' or 'mean'")
    if callable(data):
        sources = [data(rep) for rep in range(replications)]
    else:
        if replications != 1:
            raise ValidationError("fixed event data cannot be replicated")
        sources = [data]
    all_rho = []
    labels = None
    for events in sources:
        pair_labels, rho = _pairwise_correlations(events, dts, config)
        if labels is None:
            labels = pair_labels
        elif labels != pair_labels:
            raise ValidationError("replicates disagree on the asset panel")
        all_rho.append(rho)
    stacked = np.stack(all_rho)  # (reps, pairs, dts)
    curves = []
    for row, pair in enumerate(labels):
        samples = stacked[:, row, :]
        curves.append(
            EppsCurve(
                pair=pair,
                dt_values=dts.copy(),
                rho_mean=np.mean(samples, axis=0),
                rho_err=_halfwidth(samples, confidence, error_scale),
                basis=config.basis,
                replications=len(sources),
            )
        )
    return curves


def block_bootstrap(
    events: list[EventSeries],
    dt_values: Sequence[float],
    config: EstimatorConfig,
    n_blocks: int = 100,
    confidence: float = 0.95,
    error_scale: str = "spread",
) -> list[EppsCurve]:
    """Leave-one-block-out error bars for a fixed event panel.

    The window is split into ``n_blocks`` equal calendar-time blocks;
    each replicate removes one block's events from every asset and
    re-estimates the dt sweep. The time span is pinned to the full
    window throughout, so a missing block is treated as missing data
    rather than shrinking the clock.
    """
    dts = _check_dt_grid(dt_values)
    if n_blocks < 2:
        raise ValidationError("need at least 2 blocks")
    t_min = min(s.times[0] for s in events)
    t_max = max(s.times[-1] for s in events)
    if t_max <= t_min:
        raise ValidationError("degenerate panel window")
    edges = np.linspace(t_min, t_max, n_blocks + 1)
    all_rho = []
    labels = None
    for b in range(n_blocks):
        lo, hi = edges[b], edges[b + 1]
        reduced = []
        for s in events:
            if b == n_blocks - 1:
                keep = s.times < lo
            else:
                keep = (s.times < lo) | (s.times >= hi)
            if np.count_nonzero(keep) < 2:
                raise UnderpopulatedSeriesError(
                    f"removing block {b} leaves asset {s.asset_id!r} with "
                    f"{int(np.count_nonzero(keep))} events"
                )
            reduced.append(EventSeries(s.asset_id, s.times[keep], s.prices[keep]))
        pair_labels, rho = _pairwise_correlations(
            reduced, dts, config, t_min=t_min, t_max=t_max
        )
        if labels is None:
            labels = pair_labels
        all_rho.append(rho)
    stacked = np.stack(all_rho)
    curves = []
    for row, pair in enumerate(labels):
        samples = stacked[:, row, :]
        curves.append(
            EppsCurve(
                pair=pair,
                dt_values=dts.copy(),
                rho_mean=np.mean(samples, axis=0),
                rho_err=_halfwidth(samples, confidence, error_scale),
                basis=config.basis,
                replications=n_blocks,
            )
        )
    return curves
