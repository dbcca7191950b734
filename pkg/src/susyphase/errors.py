"""Exception hierarchy shared by every module."""


class SusyPhaseError(Exception):
    pass


class ConfigurationError(SusyPhaseError, ValueError):
    """Bad setup: unknown mode, wrong basis content, empty grid."""


class DimensionError(SusyPhaseError, ValueError):
    """Operands live on different bases."""


class DomainError(SusyPhaseError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """A quantity diverges at the requested point (e.g. beta = 0)."""


class NumericError(SusyPhaseError, ArithmeticError):
    """Non-finite input to a numerical kernel."""
