"""Exception types shared across the package."""


class KblError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(KblError):
    """Raised when vector/operator/space dimensions are incompatible."""


class ComplexDataError(KblError):
    """Raised when an operation restricted to real data receives complex input."""


class SingularityError(KblError):
    """Raised when a solve target is singular or too close to the spectrum."""


class MarginError(KblError):
    """Raised when a series, path or contour violates its distance margin."""


class PreconditionError(KblError):
    """Raised when a mathematical hypothesis of an operation fails.

    Distinct from :class:`DimensionMismatchError`: the inputs are well formed
    but a computed quantity (rank, projection norm, enclosure count, ...)
    does not satisfy the operation's requirements.
    """


class DegreeCapError(KblError):
    """Raised when polynomial extraction would exceed the degree cap."""


class LpSizeError(KblError):
    """Raised when a linear program exceeds the configured size cap."""


class LpNumericalError(KblError):
    """Raised when the simplex solver fails numerically after retry."""


class ConfigError(KblError):
    """Raised on malformed run configuration (unknown fields, bad types)."""
