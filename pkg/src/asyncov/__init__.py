"""Integrated covariance estimation for asynchronous event data.

Estimates integrated covariance and correlation matrices from
asynchronously observed prices in the frequency domain, with a choice
of direct, grid-snapped FFT and type-1 NUFFT coefficient engines, plus
simulation, time-scale (Epps) analysis and a benchmark suite.
"""

__version__ = "0.1.0"

from .errors import AsyncovError
from .estimator import (
    CovarianceEstimate,
    EstimatorConfig,
    covariance_matrix,
    dt_to_n,
    estimate_from_events,
    integrated_covariance,
)
from .fourier import FourierCoeffs, coeffs_forloop, coeffs_vectorised
from .nufft import NufftPlan, make_plan, nufft_type1, relative_l2_error
from .tickdata import (
    EventSeries,
    PanelTimes,
    ReturnSeries,
    ingest_taq,
    log_returns,
    nyquist_cutoff,
    rescale_times,
)
from .zfft import coeffs_zfft

__all__ = [
    "AsyncovError",
    "CovarianceEstimate",
    "EstimatorConfig",
    "EventSeries",
    "FourierCoeffs",
    "NufftPlan",
    "PanelTimes",
    "ReturnSeries",
    "__version__",
    "coeffs_forloop",
    "coeffs_vectorised",
    "coeffs_zfft",
    "covariance_matrix",
    "dt_to_n",
    "estimate_from_events",
    "ingest_taq",
    "integrated_covariance",
    "log_returns",
    "make_plan",
    "nufft_type1",
    "nyquist_cutoff",
    "relative_l2_error",
    "rescale_times",
]
