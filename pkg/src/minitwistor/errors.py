"""Exception types raised by the library.

Every error the CLI maps to exit code 2 derives from :class:`InputError`.
"""


class MinitwistorError(Exception):
    pass


class InputError(MinitwistorError, ValueError):
    """Malformed or out-of-domain input."""


class DegenerateError(InputError):
    """Input lies on a degenerate locus (zero direction, coincident points, ...)."""


class PreconditionError(InputError):
    pass


class EvaluationError(MinitwistorError, ArithmeticError):
    """A user-supplied function returned a non-finite value."""


class ContourError(InputError):
    """A pole of the integrand lies too close to the integration contour."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class ConsistencyError(MinitwistorError, AssertionError):
    """An internal identity that must hold exactly did not."""
