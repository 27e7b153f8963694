"""Exceptions raised by pqtrain."""

from typing import Dict, Optional


class PQTrainError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PQTrainError, ValueError):
    """An argument violates an alphabet, length, size or grid precondition."""


class CapacityError(InvalidArgumentError):
    """A requested sequence or matrix exceeds the configured size caps."""


class InfeasibleOrderError(InvalidArgumentError):
    """A requested spectral-null order cannot be met (M > N - 2)."""


class ConvergenceError(PQTrainError):
    """The QP solver stopped at its iteration cap."""

    def __init__(self, message: str, residuals: Optional[Dict[str, float]] = None):
        super().__init__(message)
        self.residuals = residuals or {}


class VerificationError(PQTrainError):
    """A design or waveform file failed verification."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
