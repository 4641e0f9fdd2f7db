"""Exception types shared across the package."""


class PseudoBosonError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PseudoBosonError, ValueError):
    """A precondition on a parameter or argument is violated."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class CoefficientOverflowError(PseudoBosonError, OverflowError):
    """A coefficient or moment magnitude exceeded the configured cap."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ConvergenceError(PseudoBosonError, RuntimeError):
    """An eigensolve or iterative procedure failed to converge."""

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


class DimensionMismatchError(PseudoBosonError, ValueError):
    """Operands live in truncated spaces of different dimension."""


class ConfigError(PseudoBosonError, ValueError):
    """A run configuration could not be parsed or validated.

    Attributes:
        field: Name of the offending configuration key, if known.
        line: 1-based line of a syntax error, if known.
        column: 1-based column of a syntax error, if known.
    """

    def __init__(
        self,
        message: str,
        field: str | None = None,
        line: int | None = None,
        column: int | None = None,
    ):
        super().__init__(message)
        self.field = field
        self.line = line
        self.column = column
