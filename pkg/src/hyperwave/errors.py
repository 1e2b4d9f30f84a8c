"""Exception hierarchy shared by every module."""


class HyperwaveError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(HyperwaveError, ValueError):
    """Invalid parameters or malformed input."""


class PoleError(HyperwaveError, ZeroDivisionError):
    """Evaluation requested at a genuine pole."""


class NonConvergenceError(HyperwaveError, ArithmeticError):
    """A quadrature or iteration failed to reach its tolerance."""


class TailTruncationError(NonConvergenceError):
    """The truncated tail of an integral exceeds the tolerance."""


class DivergenceError(NonConvergenceError):
    """An integral or iteration diverges."""
