"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DegenerateError(ValueError):
    """The data make the interval undefined (zero residual variance, dependent contrasts)."""


class SingularDesignError(DegenerateError):
    """The design matrix does not have full column rank."""


class ProblemFileError(ValueError):
    """A problem file could not be parsed.

    ``line`` is the 1-based line number where parsing failed, or ``None``
    when the failure is not tied to a line (e.g. truncated input).
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""

    def __init__(self, message: str, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error
