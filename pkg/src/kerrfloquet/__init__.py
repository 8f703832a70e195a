"""Driven Duffing oscillator: classical averaging, Floquet effective Hamiltonians
in two Fock bases, and open-system multiphoton-resonance scans."""

from .errors import (
    ConvergenceError,
    DegenerateSteadyStateError,
    SweepError,
    TruncationError,
    ValidationError,
)
from .params import (
    BasisChoice,
    BasisKind,
    RWACoefficients,
    SystemParams,
    bogoliubov_coefficients,
    compute_rwa_coefficients,
    params_from_rwa,
)

__all__ = [
    "BasisChoice",
    "BasisKind",
    "ConvergenceError",
    "DegenerateSteadyStateError",
    "RWACoefficients",
    "SweepError",
    "SystemParams",
    "TruncationError",
    "ValidationError",
    "bogoliubov_coefficients",
    "compute_rwa_coefficients",
    "params_from_rwa",
]
__version__ = "0.1.0"
