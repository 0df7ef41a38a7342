"""Exception hierarchy shared by all modules."""


class LazyEnsError(Exception):
    pass


class ValidationError(LazyEnsError, ValueError):
    """Input failed a structural or numerical precondition."""


class NotSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class Degenerate(ValidationError):
    """Density matrix has a zero (or numerically non-positive) eigenvalue."""


class MismatchedState(ValidationError):
    pass


class InfeasibleMean(ValidationError):
    pass


class DegenerateValues(ValidationError):
    pass


class NoConvergence(LazyEnsError, RuntimeError):
    """Iterative routine hit its iteration cap.

    ``payload`` carries whatever partial result the routine had, so callers
    can still report the last iterate.
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload
