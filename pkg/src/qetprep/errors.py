"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical routine failed to reach its tolerance.

    Attributes:
        residual: Best residual reached before giving up.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class CompositionError(ArithmeticError):
    """Formal series composition produced coefficients growing out of control."""


class PhaseSolverError(ConvergenceError):
    """Phase-factor search stagnated above the acceptance residual."""


class DegenerateFunctionError(ValueError):
    """The target function vanishes identically on its domain."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class WidthError(ValueError):
    """A circuit or state is wider than the simulator memory guard permits."""
