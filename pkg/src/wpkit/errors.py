"""Exception hierarchy shared by all wpkit modules.

The CLI maps these onto exit codes: validation errors -> 2, resource caps
-> 3, numerical failures -> 4, verification failures -> 5.
"""


class WpkitError(Exception):
    """Base class for all wpkit errors."""


class DomainError(WpkitError, ValueError):
    """Invalid input: a precondition of an operation is violated."""


class ResourceCapError(WpkitError, RuntimeError):
    """A configured cap (dimension, census size, evaluation budget) was hit."""


class NumericalError(WpkitError, RuntimeError):
    """A quadrature or root-find did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class VerificationError(WpkitError, RuntimeError):
    """A property the toolkit exists to check actually failed.

    This is the most important error: it means a verified inequality or
    completeness statement does not hold on the tested instance.
    """
