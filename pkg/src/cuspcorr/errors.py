"""Exception hierarchy shared by every module."""


class CuspcorrError(Exception):
    """Base class for all errors raised by cuspcorr."""


class ParameterError(CuspcorrError, ValueError):
    pass


class UnsupportedWeightError(ParameterError):
    pass


class PreconditionError(ParameterError):
    pass


class ResourceError(CuspcorrError):
    pass


class NumericInstabilityError(CuspcorrError, ArithmeticError):
    pass


class InternalConsistencyError(CuspcorrError, AssertionError):
    pass


class AccuracyError(CuspcorrError, ArithmeticError):
    pass


class InsufficientTruncationError(CuspcorrError):
    """The Kloosterman/Bessel sum was cut off too early; raise ``cmax``."""


class IntegrityError(CuspcorrError):
    """Corrupt or truncated coefficient cache."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UsageError(CuspcorrError):
    pass
