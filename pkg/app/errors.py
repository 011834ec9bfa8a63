"""
Exception hierarchy for dimshape.
"""

from typing import Any, Optional


class DimshapeError(Exception):
    """Base class for every error raised by dimshape."""


class ContractViolation(DimshapeError, ValueError):
    """A caller broke an operation's precondition."""


class NoStatisticsError(ContractViolation):
    pass


class EmptyStateSetError(ContractViolation):
    pass


class DegenerateCurveError(ContractViolation):
    pass


class ConfigError(DimshapeError, ValueError):
    pass


class DynamicsBlowupError(DimshapeError, ArithmeticError):
    """Integration produced a non-finite state."""


class DivergedError(DimshapeError, ArithmeticError):
    """An ARS update produced non-finite weights."""

    def __init__(self, message: str, last_good: Optional[Any] = None, epoch: int = -1):
        super().__init__(message)
        self.last_good = last_good
        self.epoch = epoch
        # filled in by the trainer with the epochs completed before divergence
        self.history: Optional[Any] = None


class InputError(DimshapeError):
    """An input file could not be read or parsed."""


class PolicyFileError(InputError):
    pass


class SchemaVersionError(PolicyFileError):
    pass
