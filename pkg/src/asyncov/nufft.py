"""Type-1 (adjoint) non-uniform FFT with selectable averaging kernels.

The pipeline is the classic three-step gridding transform: spread each
source point onto an oversampled uniform grid with a short averaging
kernel, FFT the grid, then divide the central modes by the kernel's
Fourier transform to undo the averaging. Three kernels are supported:

* ``gaussian`` — fast Gaussian gridding, two exponential evaluations
  per source point;
* ``kaiser_bessel`` — sinh-form window evaluated on the fly, 1-periodic
  domain;
* ``exp_semicircle`` — naive variant whose transform has no closed
  form; the deconvolution table is filled by adaptive Gauss-Kronrod
  quadrature once per plan.

Accuracy is controlled by the requested tolerance ``epsilon``: the
one-sided spreading width is chosen so the relative l2 error of the
returned modes against direct summation stays at or below ``epsilon``.
The oversampling ratio is fixed at 2 and the grid length is exactly
twice the mode count, so FFT lengths are arbitrary (mixed-radix).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import LowLevelCallable, integrate
from scipy.special import i0

from . import _fast
from .errors import (
    DeconvolutionError,
    DimensionMismatchError,
    DomainError,
    GridTooSmallError,
    ToleranceError,
    ValidationError,
)
from .fourier import FourierCoeffs
from .tickdata import TWO_PI, ReturnSeries

KERNELS = ("gaussian", "kaiser_bessel", "exp_semicircle")
_KERNEL_ALIASES = {
    "gaussian": "gaussian",
    "fgg": "gaussian",
    "kaiser_bessel": "kaiser_bessel",
    "kb": "kaiser_bessel",
    "exp_semicircle": "exp_semicircle",
    "es": "exp_semicircle",
}

SIGMA = 2.0  # oversampling ratio, fixed
EPS_MIN, EPS_MAX = 1e-15, 1e-1

_es_integrand = LowLevelCallable(_fast.es_transform_integrand_ctypes)


def canonical_kernel(name: str) -> str:
    try:
        return _KERNEL_ALIASES[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown kernel {name!r}; pick one of {KERNELS}") from None


@dataclass(frozen=True, eq=False)
class NufftPlan:
    """Immutable precomputed transform parameters for one mode count.

    ``phi_hat`` tabulates the kernel transform at k = -N..N and
    ``deconv_scale`` is the kernel-specific constant folded into the
    deconvolution, so the corrected mode k is
    ``deconv_scale * F_fft(k) / phi_hat(k)``.
    """

    kernel: str
    epsilon: float
    n_modes: int  # M = 2N + 1
    m_r: int  # oversampled grid length, 2M
    m_sp: int  # one-sided spreading width in grid points
    period: float  # source-point domain length (2*pi, or 1 for KB)
    phi_hat: np.ndarray
    deconv_scale: float
    tau: float = 0.0  # gaussian width parameter
    t1: float = 0.0  # gaussian exponent scale pi/lambda
    b: float = 0.0  # kaiser-bessel shape
    beta: float = 0.0  # exp-semicircle shape
    alpha: float = 0.0  # exp-semicircle support half-width

    def __post_init__(self):
        tab = np.asarray(self.phi_hat, dtype=np.float64).copy()
        tab.flags.writeable = False
        object.__setattr__(self, "phi_hat", tab)

    @property
    def n_cutoff(self) -> int:
        return (self.n_modes - 1) // 2


def spreading_width(kernel: str, epsilon: float) -> int:
    """One-sided width delivering relative l2 accuracy `epsilon`.

    These are deliberately strict choices: the requested tolerance is a
    guarantee, not a target.
    """
    kernel = canonical_kernel(kernel)
    if kernel == "gaussian":
        return int(
            math.floor(-math.log(epsilon) * (SIGMA - 0.5) / (math.pi * (SIGMA - 1.0)) + 0.5)
        )
    digits = math.ceil(math.log10(1.0 / epsilon))
    if kernel == "kaiser_bessel":
        return int(math.floor((digits + 2) / 2))
    return int(math.floor((digits + 2) / 2)) + 2


def _es_phi_hat(n_cutoff: int, beta: float, alpha: float) -> np.ndarray:
    """Transform table alpha * phihat0(alpha*k) for k = -N..N.

    phihat0(y) = 2 * int_0^1 exp(beta*(sqrt(1-x^2)-1)) * cos(y*x) dx is
    even in y, so only k >= 0 is integrated and the rest mirrored.
    """
    half = np.empty(n_cutoff + 1)
    with warnings.catch_warnings():
        # quad flags roundoff when epsabs=1e-15 is below what float64
        # can certify; the returned values are still at machine accuracy
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(n_cutoff + 1):
            val, _ = integrate.quad(
                _es_integrand,
                0.0,
                1.0,
                args=(beta, alpha * k),
                epsabs=1e-15,
                epsrel=1e-13,
                limit=200,
            )
            half[k] = 2.0 * alpha * val
    return np.concatenate([half[:0:-1], half])


def make_plan(kernel: str, n_modes: int, epsilon: float = 1e-12) -> NufftPlan:
    """Build an immutable plan for ``n_modes`` (odd) output modes.

    Raises
    ------
    ToleranceError
        ``epsilon`` outside [1e-15, 1e-1].
    GridTooSmallError
        the total spreading width 2*m_sp + 1 does not fit on the grid.
    """
    kernel = canonical_kernel(kernel)
    if n_modes < 3 or n_modes % 2 == 0:
        raise ValidationError(f"mode count must be odd and >= 3, got {n_modes}")
    if not (EPS_MIN <= epsilon <= EPS_MAX):
        raise ToleranceError(
            f"tolerance {epsilon} outside [{EPS_MIN}, {EPS_MAX}]"
        )
    m_r = int(SIGMA) * n_modes
    m_sp = spreading_width(kernel, epsilon)
    if 2 * m_sp + 1 > m_r:
        raise GridTooSmallError(
            f"spreading width {2 * m_sp + 1} exceeds grid length {m_r}; "
            "increase the mode count or loosen the tolerance"
        )
    n_cutoff = (n_modes - 1) // 2
    ks = np.arange(-n_cutoff, n_cutoff + 1)
    if kernel == "gaussian":
        lam = SIGMA * SIGMA * m_sp / (SIGMA * (SIGMA - 0.5))
        tau = math.pi * lam / (m_r * m_r)
        t1 = math.pi / lam
        phi_hat = math.sqrt(TWO_PI) * np.exp(-(ks.astype(np.float64) ** 2) * tau)
        scale = math.sqrt(TWO_PI) * math.sqrt(math.pi / tau) / m_r
        plan = NufftPlan(
            kernel, epsilon, n_modes, m_r, m_sp, TWO_PI, phi_hat, scale, tau=tau, t1=t1
        )
    elif kernel == "kaiser_bessel":
        b = math.pi * (2.0 - 1.0 / SIGMA)
        arg = b * b - (TWO_PI * ks / m_r) ** 2
        phi_hat = i0(m_sp * np.sqrt(arg)) / m_r
        plan = NufftPlan(
            kernel, epsilon, n_modes, m_r, m_sp, 1.0, phi_hat, 1.0 / m_r, b=b
        )
    else:
        omega = 2 * m_sp
        beta = 2.3 * omega
        alpha = math.pi * omega / m_r
        phi_hat = _es_phi_hat(n_cutoff, beta, alpha)
        plan = NufftPlan(
            kernel, epsilon, n_modes, m_r, m_sp, TWO_PI, phi_hat, TWO_PI / m_r,
            beta=beta, alpha=alpha,
        )
    if not np.all(np.isfinite(plan.phi_hat)) or np.any(plan.phi_hat == 0.0):
        raise DeconvolutionError("deconvolution table has zero or non-finite entries")
    return plan


def spread(plan: NufftPlan, series: ReturnSeries) -> np.ndarray:
    """Accumulate kernel-weighted source strengths on the oversampled grid.

    Source times must lie in [0, 2*pi); they are mapped to the plan's
    period internally (the Kaiser-Bessel domain is [0, 1)). Indices that
    fall off either grid edge wrap around, implementing the kernel's
    periodisation without ever evaluating the periodised sum.
    """
    t = series.times
    if t.size and (t[0] < 0.0 or t[-1] >= TWO_PI):
        raise DomainError("source times must lie in [0, 2*pi)")
    grid = np.zeros(plan.m_r, dtype=np.float64)
    if t.size == 0:
        return grid
    if plan.kernel == "gaussian":
        _fast.spread_gaussian(t, series.deltas, grid, plan.m_sp, plan.t1)
    elif plan.kernel == "kaiser_bessel":
        _fast.spread_kaiser_bessel(
            t / TWO_PI, series.deltas, grid, plan.m_sp, plan.b
        )
    else:
        _fast.spread_exp_semicircle(
            t, series.deltas, grid, plan.m_sp, plan.beta, plan.alpha
        )
    return grid


def forward_fft(grid: np.ndarray) -> np.ndarray:
    """DFT of the oversampled grid: bin m holds sum_l f_l e^{-2 pi i m l / M_r}."""
    return scipy.fft.fft(np.asarray(grid, dtype=np.float64))


def deconvolve(plan: NufftPlan, raw_modes: np.ndarray) -> FourierCoeffs:
    """Undo the kernel averaging and return the central modes.

    The FFT bins hold sums over e^{-i k t}; the public layout stores
    c+_k = sum e^{+i k t} delta, obtained by reflecting the mode index
    (the mode set -N..N is symmetric). This is the single place the two
    sign conventions meet.
    """
    raw = np.asarray(raw_modes)
    if raw.shape != (plan.m_r,):
        raise DimensionMismatchError(
            f"expected {plan.m_r} raw modes, got {raw.shape}"
        )
    if np.min(np.abs(plan.phi_hat)) < 1e-300:
        raise DeconvolutionError("deconvolution table entry below 1e-300")
    n = plan.n_cutoff
    central = np.concatenate([raw[plan.m_r - n :], raw[: n + 1]])
    corrected = plan.deconv_scale * central / plan.phi_hat
    return FourierCoeffs(n, corrected[::-1])


def nufft_type1(plan: NufftPlan, series: ReturnSeries) -> FourierCoeffs:
    """spread -> FFT -> deconvolve; relative l2 error <= plan.epsilon."""
    return deconvolve(plan, forward_fft(spread(plan, series)))


def relative_l2_error(approx: FourierCoeffs, exact: FourierCoeffs) -> float:
    """|| approx - exact ||_2 / || exact ||_2 over the shared mode range."""
    if approx.n_cutoff != exact.n_cutoff:
        raise DimensionMismatchError(
            f"cutoffs differ: {approx.n_cutoff} vs {exact.n_cutoff}"
        )
    denom = np.linalg.norm(exact.c_plus)
    if denom == 0.0:
        raise ZeroDivisionError("exact coefficient vector has zero norm")
    return float(np.linalg.norm(approx.c_plus - exact.c_plus) / denom)
