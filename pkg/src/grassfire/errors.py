"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: config problems exit 2, data
problems exit 3, numerical problems exit 4.
"""


class GrassfireError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GrassfireError):
    """A config file is missing, malformed, or self-contradictory."""


class DataError(GrassfireError):
    """Input data violates a documented contract (bad values, bad bounds)."""


class FormatError(DataError):
    """A file does not conform to its on-disk format.

    Messages include the byte offset (binary formats) or line number
    (text formats) of the first problem found.
    """


class BoundsError(DataError):
    """An index, frame, or region lies outside the data it addresses."""


class NumericalError(GrassfireError):
    """A computation cannot proceed for numerical reasons."""


class DegeneratePatchError(NumericalError):
    """A patch matrix is numerically rank-deficient and has no well-defined
    k-dimensional column space (spatially constant or linearly dependent
    bands)."""


class SingularModelError(NumericalError):
    """A background covariance is not positive-definite after shrinkage."""


class UndefinedScoreError(NumericalError):
    """An ACE score is undefined because the whitened test pixel is zero."""


class CapacityError(NumericalError):
    """A filtration would exceed the supported simplex budget; retry with a
    smaller scale cap."""
