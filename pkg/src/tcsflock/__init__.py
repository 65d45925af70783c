"""Thermodynamic Cucker-Smale particles in a harmonic well: simulation and verification."""

from .errors import (
    ConfigError,
    InadmissibleInitialData,
    KernelDomainError,
    NumericalBlowUp,
    NumericalFailure,
    TCSError,
    TemperatureCollapse,
)
from .integrator import IntegratorConfig, Trajectory, integrate, rk4_step
from .model import (
    CommunicationKernel,
    ModelParams,
    ParticleEnsemble,
    UserKernel,
    conserved_quantities,
    rhs,
)

__all__ = [
    "CommunicationKernel", "ConfigError", "InadmissibleInitialData", "IntegratorConfig",
    "KernelDomainError", "ModelParams", "NumericalBlowUp", "NumericalFailure", "ParticleEnsemble",
    "TCSError", "TemperatureCollapse", "Trajectory", "UserKernel", "conserved_quantities",
    "integrate", "rhs", "rk4_step",
]
