"""Reference evaluation of the non-normalised Fourier coefficients.

Two quadratic-cost engines live here: a plain double loop over all
modes (the benchmark every fast engine is validated against) and a
streaming variant that halves the work by exploiting the Hermitian
symmetry available for real-valued increments. Coefficients carry no
1/(2*pi) normalisation; the estimator's convolution weights absorb it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast
from .errors import DimensionMismatchError, ValidationError
from .tickdata import ReturnSeries


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Modes c+_k = sum_h e^{+i k t_h} delta_h for k = -N..N.

    Storage is a single complex vector of length 2N+1 with index 0
    holding k = -N. For real increments the negative modes are the
    conjugates of the positive ones; ``c_minus`` relies on that.
    """

    n_cutoff: int
    c_plus: np.ndarray

    def __post_init__(self):
        if self.n_cutoff < 0:
            raise ValidationError("mode cutoff must be non-negative")
        c = np.asarray(self.c_plus, dtype=np.complex128).reshape(-1).copy()
        if c.size != 2 * self.n_cutoff + 1:
            raise DimensionMismatchError(
                f"expected {2 * self.n_cutoff + 1} modes, got {c.size}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "c_plus", c)

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.n_cutoff, self.n_cutoff + 1)

    @property
    def c_minus(self) -> np.ndarray:
        """c-_k = conjugate(c+_k), valid because increments are real."""
        return np.conj(self.c_plus)

    def restrict(self, n_cutoff: int) -> "FourierCoeffs":
        """Keep the central 2n+1 modes (n <= current cutoff)."""
        if n_cutoff > self.n_cutoff:
            raise DimensionMismatchError(
                f"cannot widen cutoff {self.n_cutoff} to {n_cutoff}"
            )
        if n_cutoff == self.n_cutoff:
            return self
        drop = self.n_cutoff - n_cutoff
        return FourierCoeffs(n_cutoff, self.c_plus[drop : len(self.c_plus) - drop])


def _check_inputs(series: ReturnSeries, n_cutoff: int):
    if n_cutoff < 0:
        raise ValidationError("mode cutoff must be non-negative")
    if series.n_returns == 0:
        raise ValidationError(f"asset {series.asset_id!r} has no returns")


def coeffs_forloop(series: ReturnSeries, n_cutoff: int) -> FourierCoeffs:
    """Direct summation over every mode k = -N..N. O(n*N) work."""
    _check_inputs(series, n_cutoff)
    c = _fast.direct_coeffs(series.times, series.deltas, n_cutoff)
    return FourierCoeffs(n_cutoff, c)


def coeffs_vectorised(series: ReturnSeries, n_cutoff: int) -> FourierCoeffs:
    """Hermitian-symmetric evaluation: modes k = 1..N computed directly,
    k = 0 as the plain sum of increments, k < 0 by conjugation.

    Work is streamed one mode at a time so transient memory stays
    O(n + N) instead of the n-by-N matrix a naive vectorisation builds.
    """
    _check_inputs(series, n_cutoff)
    m = 2 * n_cutoff + 1
    c = np.empty(m, dtype=np.complex128)
    c[n_cutoff] = np.sum(series.deltas)
    if n_cutoff > 0:
        z = _fast.negative_mode_coeffs(series.times, series.deltas, n_cutoff)
        c[n_cutoff + 1 :] = np.conj(z)
        c[n_cutoff - 1 :: -1] = z
    return FourierCoeffs(n_cutoff, c)
