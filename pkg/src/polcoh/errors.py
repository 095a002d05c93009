"""Exception types raised across the package."""


class PolcohError(Exception):
    """Base class for all package errors."""


class DomainError(PolcohError, ValueError):
    """Argument outside the supported domain of a special function."""


class InvalidParameterError(PolcohError, ValueError):
    """Coherent-state parameters violate |alpha| < 1 or the chirality rule."""


class ChiralityMismatchError(PolcohError, ValueError):
    """A Fock label's sign disagrees with the state's chirality."""


class UnsupportedParameterError(PolcohError, ValueError):
    """Closed-form moment requested for parameters outside the real gauge."""


class TruncationError(PolcohError, RuntimeError):
    """Series truncation leaves a tail larger than the requested tolerance."""


class GridMismatchError(PolcohError, ValueError):
    """Fields sampled on different grids were combined."""


class ResourceLimitError(PolcohError, RuntimeError):
    """Required grid size exceeds the configured caps."""


class SingularMatrixError(PolcohError, ValueError):
    """Width matrix is not positive definite."""
