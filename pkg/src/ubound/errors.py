"""Exception and warning types shared across the package.

Validation errors derive from ValueError so callers can treat bad inputs
uniformly; numeric failures derive from ArithmeticError.  The CLI maps the
two groups to distinct exit codes.
"""


class UboundValidationError(ValueError):
    """Invalid input: bad parameters, malformed tables, broken invariants."""


class DomainError(UboundValidationError):
    """Arguments outside the mathematical domain of an operation."""


class OutOfSupportError(UboundValidationError):
    """Evaluation point outside the support of a moment envelope."""


class EmptySupportError(UboundValidationError):
    """A combined envelope has empty support."""


class TooLargeError(UboundValidationError):
    """Exact enumeration would exceed the configured outcome budget."""


class UboundNumericError(ArithmeticError):
    """Numeric failure: non-convergence, bracket loss, bad spectra."""


class NonConvergentError(UboundNumericError):
    """An iterative evaluation hit its term or iteration budget."""


class BracketFailureError(UboundNumericError):
    """A one-dimensional search could not bracket its optimum."""


class NotPSDError(UboundNumericError):
    """A kernel required to be positive semidefinite is not."""


class NegativeKernelWarning(UserWarning):
    """A materialized kernel has negative cells; sum bounds assume f >= 0."""


class InfeasibleClassWarning(UserWarning):
    """Moment constraints that no single variable can meet (n = 1 check)."""
