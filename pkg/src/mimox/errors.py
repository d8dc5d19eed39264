"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to.
"""


class MimoxError(Exception):
    exit_code = 1


class PreconditionError(MimoxError, ValueError):
    """A scheme or operation was invoked outside its stated hypotheses."""

    exit_code = 3


class InfeasibleError(PreconditionError):
    """The requested DoF assignment fails the dimension-counting conditions."""


class DegenerateChannelError(MimoxError, ArithmeticError):
    """Channels are numerically degenerate beyond generic rank behaviour."""

    exit_code = 4


class DefectiveMatrixError(DegenerateChannelError):
    """Eigenvector matrix is numerically singular (or too ill conditioned)."""
