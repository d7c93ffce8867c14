"""Numerical laboratory for prime-weighted correlations of Hecke eigenvalues."""

from .errors import (
    AccuracyError,
    CuspcorrError,
    InsufficientTruncationError,
    IntegrityError,
    InternalConsistencyError,
    NumericInstabilityError,
    ParameterError,
    PreconditionError,
    ResourceError,
    UnsupportedWeightError,
    UsageError,
)
from .forms import CuspForm, build_delta, build_form

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CuspForm",
    "CuspcorrError",
    "InsufficientTruncationError",
    "IntegrityError",
    "InternalConsistencyError",
    "NumericInstabilityError",
    "ParameterError",
    "PreconditionError",
    "ResourceError",
    "UnsupportedWeightError",
    "UsageError",
    "build_delta",
    "build_form",
]
