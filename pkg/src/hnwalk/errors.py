"""Exception types raised across the package."""


class HNWalkError(Exception):
    """Base class for all package errors."""


class ParameterError(HNWalkError, ValueError):
    """Invalid physical parameters, or inputs inconsistent with a basis."""


class ShapeError(HNWalkError, ValueError):
    """Dimension mismatch between an operator and a vector."""


class DegenerateStateError(HNWalkError, ArithmeticError):
    """A state with zero (or non-finite) norm was asked to be normalized."""


class EvolutionError(HNWalkError, RuntimeError):
    """Time propagation failed; ``t`` is the time at which it was detected."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class ContractError(HNWalkError, ValueError):
    """An observable was evaluated on an input violating its precondition."""


class DomainError(HNWalkError, ValueError):
    """A scalar function was evaluated outside its domain."""


class StepSizeError(HNWalkError, ValueError):
    """Finite-difference step too small to resolve the signal."""


class OracleScaleError(HNWalkError, ValueError):
    """Dense reference computation requested above its size guard."""


class ConfigError(HNWalkError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class RunError(HNWalkError, RuntimeError):
    """A sweep point failed during an experiment run."""


class WindowError(HNWalkError, ValueError):
    """A fit window holds too few or nonpositive samples."""
