"""Coherent states of the two-dimensional isotropic oscillator in polar form."""
from .errors import (ChiralityMismatchError, DomainError, GridMismatchError,
                     InvalidParameterError, PolcohError, ResourceLimitError,
                     SingularMatrixError, TruncationError, UnsupportedParameterError)
from .state_core import LEFT, RIGHT, CoherentParams, amplitude, coefficient, normalization, overlap

__version__ = "0.1.0"

__all__ = [
    "CoherentParams", "LEFT", "RIGHT", "amplitude", "coefficient", "normalization", "overlap",
    "PolcohError", "DomainError", "InvalidParameterError", "ChiralityMismatchError",
    "UnsupportedParameterError", "TruncationError", "GridMismatchError", "ResourceLimitError",
    "SingularMatrixError",
]
