"""Integrated covariance and correlation from Fourier coefficients.

Coefficients of the log-price increments are combined pairwise through
a weighted convolution over the shared mode range: uniform weights
(``dirichlet``) or triangular weights that damp the high frequencies
(``fejer``). The coefficient engine, mode-count policy and basis are
bundled in :class:`EstimatorConfig` so the same assembly code serves
the reference engines, the zero-padded FFT and the NUFFT variants.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import nufft as _nufft
from .errors import (
    DegenerateWeightError,
    DimensionMismatchError,
    NumericalConsistencyError,
    ResolutionError,
    ValidationError,
    ZeroVarianceError,
)
from .fourier import FourierCoeffs, coeffs_forloop, coeffs_vectorised
from .tickdata import (
    EventSeries,
    ReturnSeries,
    log_returns,
    nyquist_cutoff,
    rescale_times,
)
from .zfft import coeffs_zfft, grid_displacement

BASES = ("dirichlet", "fejer")
ENGINES = ("forloop", "vectorised", "zfft", "nufft")
N_MODES_POLICIES = ("nyquist", "fixed", "dt")

# rescaled snap distance (fraction of a grid cell) above which zfft
# input is flagged as genuinely asynchronous
_ZFFT_ASYNC_TOL = 1e-6
_IMAG_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator choices: basis kernel, engine, and mode-count policy.

    ``n_mode`` selects how the cutoff N is chosen: ``"nyquist"``
    derives it from the smallest rescaled gap, ``"fixed"`` uses
    ``fixed_n``, and ``"dt"`` converts the sampling interval ``dt``
    (original-clock seconds) via :func:`dt_to_n`. With ``pairwise_n``
    each pair (i, j) uses min(N_i, N_j) of the per-asset cutoffs
    instead of one panel-wide N.
    """

    basis: str = "dirichlet"
    engine: str = "nufft"
    kernel: str = "gaussian"
    epsilon: float = 1e-12
    n_mode: str = "nyquist"
    fixed_n: int | None = None
    dt: float | None = None
    pairwise_n: bool = False

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValidationError(f"unknown basis {self.basis!r}; pick one of {BASES}")
        if self.engine not in ENGINES:
            raise ValidationError(
                f"unknown engine {self.engine!r}; pick one of {ENGINES}"
            )
        if self.n_mode not in N_MODES_POLICIES:
            raise ValidationError(
                f"unknown n_mode {self.n_mode!r}; pick one of {N_MODES_POLICIES}"
            )
        if self.n_mode == "fixed":
            if self.fixed_n is None or self.fixed_n < 1:
                raise ValidationError("fixed n_mode needs fixed_n >= 1")
        if self.n_mode == "dt" and (self.dt is None or self.dt <= 0):
            raise ValidationError("dt n_mode needs a positive dt")
        if self.engine == "nufft":
            object.__setattr__(self, "kernel", _nufft.canonical_kernel(self.kernel))


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Integrated covariance and correlation over the sample window.

    ``n_used`` is the panel-wide cutoff, or a D x D integer matrix of
    per-pair cutoffs when the estimate was built pairwise. ``warnings``
    collects documented hazards ("pairwise_dirichlet_psd",
    "zfft_asynchronous_input") without failing the estimate.
    """

    asset_ids: tuple[str, ...]
    sigma: np.ndarray
    corr: np.ndarray
    n_used: int | np.ndarray
    basis: str
    warnings: tuple[str, ...] = ()


def dt_to_n(t_span: float, dt: float) -> int:
    """Mode cutoff investigating time scale ``dt`` over a window ``t_span``."""
    if dt <= 0 or dt > t_span:
        raise ValidationError(f"dt must lie in (0, {t_span}], got {dt}")
    n = int(math.floor((t_span / dt - 1.0) / 2.0))
    if n < 1:
        raise ResolutionError(
            f"dt {dt} over span {t_span} resolves {n} modes; need >= 1"
        )
    return n


def _basis_weights(n_cutoff: int, basis: str) -> np.ndarray:
    ks = np.arange(-n_cutoff, n_cutoff + 1)
    if basis == "dirichlet":
        return np.full(ks.size, 1.0 / (2 * n_cutoff + 1))
    if n_cutoff == 0:
        raise DegenerateWeightError("fejer weights are undefined for N = 0")
    return (1.0 - np.abs(ks) / n_cutoff) / (n_cutoff + 1)


def integrated_covariance(
    ci: FourierCoeffs, cj: FourierCoeffs, n_cutoff: int, basis: str
) -> float:
    """Weighted convolution sum_k w_k c+_k(i) c-_k(j) over k = -N..N.

    The imaginary part must cancel (it does exactly for Hermitian
    coefficient pairs); a residual above 1e-10 relative raises
    :class:`NumericalConsistencyError` rather than being dropped.
    """
    if basis not in BASES:
        raise ValidationError(f"unknown basis {basis!r}")
    if ci.n_cutoff != cj.n_cutoff:
        raise DimensionMismatchError(
            f"coefficient cutoffs differ: {ci.n_cutoff} vs {cj.n_cutoff}"
        )
    if n_cutoff > ci.n_cutoff:
        raise DimensionMismatchError(
            f"requested N = {n_cutoff} exceeds available cutoff {ci.n_cutoff}"
        )
    a = ci.restrict(n_cutoff)
    b = cj.restrict(n_cutoff)
    w = _basis_weights(n_cutoff, basis)
    val = complex(np.sum(w * a.c_plus * b.c_minus))
    if abs(val.imag) > _IMAG_RESIDUAL_TOL * (1.0 + abs(val.real)):
        raise NumericalConsistencyError(
            f"imaginary residual {val.imag:.3e} exceeds tolerance "
            f"(real part {val.real:.3e})"
        )
    return val.real


@functools.lru_cache(maxsize=32)
def _cached_plan(kernel: str, n_modes: int, epsilon: float) -> _nufft.NufftPlan:
    return _nufft.make_plan(kernel, n_modes, epsilon)


def asset_coefficients(
    series: ReturnSeries, n_cutoff: int, config: EstimatorConfig
) -> FourierCoeffs:
    """Compute one asset's modes k = -N..N with the configured engine."""
    if config.engine == "forloop":
        return coeffs_forloop(series, n_cutoff)
    if config.engine == "vectorised":
        return coeffs_vectorised(series, n_cutoff)
    if config.engine == "zfft":
        dt0 = float(np.min(np.diff(series.times)))
        return coeffs_zfft(series, dt0, n_cutoff)
    # a 3-mode transform is the smallest plannable one; N = 0 reduces to
    # the plain increment sum, which is exact
    if n_cutoff == 0:
        return FourierCoeffs(0, np.array([np.sum(series.deltas)], dtype=complex))
    plan = _cached_plan(config.kernel, 2 * n_cutoff + 1, config.epsilon)
    return _nufft.nufft_type1(plan, series)


def _per_asset_cutoffs(
    returns: list[ReturnSeries], config: EstimatorConfig, t_span: float | None
) -> list[int]:
    if config.n_mode == "fixed":
        return [config.fixed_n] * len(returns)
    if config.n_mode == "dt":
        if t_span is None:
            raise ValidationError("n_mode='dt' needs the original-clock span t_span")
        return [dt_to_n(t_span, config.dt)] * len(returns)
    if config.pairwise_n:
        return [nyquist_cutoff([rs]) for rs in returns]
    return [nyquist_cutoff(returns)] * len(returns)


def covariance_matrix(
    returns: list[ReturnSeries],
    config: EstimatorConfig,
    t_span: float | None = None,
) -> CovarianceEstimate:
    """Assemble the D x D integrated covariance and correlation matrices.

    Coefficients are computed once per asset with the configured engine
    and shared across all pairs. Correlations require every diagonal
    entry to be positive; a zero-variance asset raises
    :class:`ZeroVarianceError` naming it.
    """
    if not returns:
        raise ValidationError("covariance_matrix needs at least one series")
    d = len(returns)
    cutoffs = _per_asset_cutoffs(returns, config, t_span)
    coeffs = [
        asset_coefficients(rs, n, config) for rs, n in zip(returns, cutoffs)
    ]
    warnings: list[str] = []
    if config.pairwise_n and config.basis == "dirichlet" and d > 1:
        warnings.append("pairwise_dirichlet_psd")
    if config.engine == "zfft":
        disp = max(
            grid_displacement(rs, float(np.min(np.diff(rs.times))))
            for rs in returns
        )
        if disp > _ZFFT_ASYNC_TOL:
            warnings.append("zfft_asynchronous_input")

    sigma = np.empty((d, d))
    n_used = np.empty((d, d), dtype=np.int64)
    for i in range(d):
        for j in range(i, d):
            n_ij = min(cutoffs[i], cutoffs[j])
            val = integrated_covariance(coeffs[i], coeffs[j], n_ij, config.basis)
            sigma[i, j] = sigma[j, i] = val
            n_used[i, j] = n_used[j, i] = n_ij
    variances = np.diag(sigma)
    for rs, v in zip(returns, variances):
        if v <= 0.0:
            raise ZeroVarianceError(rs.asset_id)
    scale = 1.0 / np.sqrt(variances)
    corr = sigma * np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return CovarianceEstimate(
        asset_ids=tuple(rs.asset_id for rs in returns),
        sigma=sigma,
        corr=corr,
        n_used=n_used if config.pairwise_n else int(n_used[0, 0]),
        basis=config.basis,
        warnings=tuple(warnings),
    )


def estimate_from_events(
    events: list[EventSeries], config: EstimatorConfig
) -> CovarianceEstimate:
    """Full pipeline: rescale, form log returns, pick N, estimate."""
    panel = rescale_times(events)
    returns = [log_returns(s, panel) for s in events]
    return covariance_matrix(returns, config, t_span=panel.t_span)
