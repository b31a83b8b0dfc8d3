"""Exception taxonomy for the asyncov package.

Every failure mode raised by library code derives from :class:`AsyncovError`
so callers (and the CLI) can catch one base class and map the concrete
subclass name to a machine-readable error kind.
"""


class AsyncovError(Exception):
    """Base class for all asyncov errors."""


class ValidationError(AsyncovError):
    """An input violates a documented precondition or type invariant."""


class ParseError(AsyncovError):
    """A text input could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnderpopulatedSeriesError(ValidationError):
    """A series ended up with fewer than two usable observations."""


class DegenerateSpanError(ValidationError):
    """All timestamps in a panel are identical; rescaling is undefined."""


class DegenerateSpacingError(ValidationError):
    """Duplicate rescaled times give a zero minimum gap."""


class ToleranceError(ValidationError):
    """Requested NUFFT tolerance is outside the supported range."""


class GridTooSmallError(ValidationError):
    """The oversampled grid cannot hold the kernel's spreading width."""


class DomainError(ValidationError):
    """A source point lies outside the kernel's periodic domain."""


class AliasingError(ValidationError):
    """Requested mode count exceeds what the grid can resolve."""


class DeconvolutionError(AsyncovError):
    """A deconvolution table entry is too close to zero to divide by."""


class DimensionMismatchError(ValidationError):
    """Two coefficient sets do not cover the same mode range."""


class DegenerateWeightError(ValidationError):
    """Basis weights are undefined (Fejer with N = 0)."""


class ZeroVarianceError(AsyncovError):
    """An asset has zero estimated variance; correlations are undefined."""

    def __init__(self, asset_id: str):
        self.asset_id = asset_id
        super().__init__(f"asset {asset_id!r} has zero estimated variance")


class NumericalConsistencyError(AsyncovError):
    """An imaginary residual exceeded its tolerance instead of cancelling."""


class ResolutionError(ValidationError):
    """A sampling-interval choice maps to fewer than one Fourier mode."""


class FactorisationError(ValidationError):
    """A covariance matrix is not positive semi-definite."""
