"""Phase operators and thermal supersymmetry breaking on truncated Fock spaces.

Modules:
    hilbert      truncated bases, operators, matrix exponentials, angle quadrature
    oscillators  ladders, number operators, Hamiltonians, supercharges
    phase        angle states, exponential phase operators, phase distributions
    thermal      thermofield doubling, thermal vacua, Bogoliubov transformations
    goldstone    supercharge action on thermal vacua, Goldstone expectations
    cli          the ``susyphase`` command
"""
from .errors import (ConfigurationError, DimensionError, DivergenceError, DomainError, NumericError,
                     SusyPhaseError)
from .oscillators import Kind

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DimensionError", "DivergenceError", "DomainError", "Kind", "NumericError",
    "SusyPhaseError", "__version__",
]
