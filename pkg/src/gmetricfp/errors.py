"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the carrier of a space."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class SingularityError(ArithmeticError):
    """A rate formula has a nonpositive denominator."""


class HypothesisError(ValueError):
    """Coefficients or contraction conditions violate the fixed-point hypotheses.

    ``witnesses`` carries whatever evidence the raising check collected.
    """

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = list(witnesses or [])


class ModeError(ValueError):
    """A schedule or function is used in a mode it does not support."""


class StaleHypothesesError(RuntimeError):
    """The solver was called without a matching hypotheses check."""


class NonConvergenceError(RuntimeError):
    """Iteration finished without reaching an accepted common fixed point."""

    def __init__(self, message, trace=None, residuals=None):
        super().__init__(message)
        self.trace = trace
        self.residuals = residuals


class BudgetError(RuntimeError):
    """An enumeration would exceed its candidate cap."""

    def __init__(self, message, candidates=0, partial=0):
        super().__init__(message)
        self.candidates = candidates
        self.partial = partial
