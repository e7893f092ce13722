"""Defines the exceptions raised by cubemixer and their exit codes."""
from __future__ import annotations


class CubeMixerError(Exception):
    """Base class for every cubemixer failure."""

    exit_code = 1


class DomainError(CubeMixerError, ValueError):
    """Argument outside the domain of an operation."""

    exit_code = 2


class ConfigError(CubeMixerError, ValueError):
    """Invalid experiment configuration."""

    exit_code = 2

    def __init__(self, field: str, message: str) -> None:
        """Initializes ConfigError with the offending field."""
        super().__init__(f"Invalid config: {field}: {message}")
        self.field = field


class NotExchangeableError(CubeMixerError, ValueError):
    """Operation needs an exchangeable update law."""

    exit_code = 2


class RegimeError(CubeMixerError, ValueError):
    """Precondition of a bound does not hold."""

    exit_code = 2


class CapacityError(CubeMixerError):
    """Problem size beyond what an exact or dense path can hold."""

    exit_code = 4


class DivergenceError(CubeMixerError):
    """Distance never reaches the threshold (periodic or reducible chain)."""

    exit_code = 4


class VerificationError(CubeMixerError):
    """An oracle check failed."""

    exit_code = 3
