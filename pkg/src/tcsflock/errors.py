"""Exception hierarchy shared by the simulator, verifiers and CLI."""

from __future__ import annotations


class TCSError(Exception):
    """Base class for every error raised by tcsflock."""


class KernelDomainError(TCSError, ValueError):
    """Kernel evaluated at a negative or non-finite distance."""


class InadmissibleInitialData(TCSError, ValueError):
    """Initial data violate a positivity requirement of the model."""


class ConfigError(TCSError, ValueError):
    """Malformed scenario configuration."""


class NumericalFailure(TCSError, ArithmeticError):
    """Integration could not continue.

    ``t`` is filled in by the integrator with the time of the step that failed.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t

    def __str__(self) -> str:
        msg = super().__str__()
        if self.t is not None:
            return f"{msg} (at t={self.t:.6g})"
        return msg


class TemperatureCollapse(NumericalFailure):
    """Some particle temperature fell to (or below) the collapse threshold."""


class NumericalBlowUp(NumericalFailure):
    """State became non-finite."""
