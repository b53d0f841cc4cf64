"""Exception hierarchy shared by every module."""


class CoherentPairsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(CoherentPairsError, ValueError):
    """A family, case or run parameter violates a documented invariant."""


class ModeError(CoherentPairsError, TypeError):
    """Exact and approximate scalars were mixed, or a computation needs the other mode."""


class ConvergenceError(CoherentPairsError, ValueError):
    """A series was offered without a valid convergence certificate."""


class ResourceError(CoherentPairsError, RuntimeError):
    """A hard cap on terms, degree or work was exceeded."""


class ConsistencyError(CoherentPairsError, ArithmeticError):
    """Two independent computation paths disagree."""


class DegenerateFunctional(CoherentPairsError, ArithmeticError):
    """A functional is not quasi-definite to the order requested."""
