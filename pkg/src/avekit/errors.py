"""Exception types raised by avekit."""


class AveError(Exception):
    """Base class for all avekit errors."""


class DimensionError(AveError, ValueError):
    """Operand shapes do not agree."""


class SingularMatrixError(AveError, ArithmeticError):
    """A factorization hit a structurally or numerically zero pivot."""


class NotPositiveDefiniteError(AveError, ArithmeticError):
    """A matrix required to be (symmetric) positive definite is not."""


class ConvergenceError(AveError, RuntimeError):
    """An iteration did not reach its tolerance within the iteration cap."""


class DenseLimitError(AveError, MemoryError):
    """Dense conversion refused because the matrix exceeds the dense guard."""
