"""Error and warning types shared across the package."""


class LegtauError(Exception):
    """Base class for all package errors."""


class NonConvergedQuadratureError(LegtauError):
    """Adaptive quadrature failed to stabilize within the node cap."""

    def __init__(self, message, estimate=None, nodes=None):
        super().__init__(message)
        self.estimate = estimate
        self.nodes = nodes


class DimensionMismatchError(LegtauError):
    """Operands have incompatible working dimensions."""


class SingularJacobianError(LegtauError):
    """Newton Jacobian is numerically singular."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class MaxIterationsError(LegtauError):
    """Newton iteration hit the iteration cap without converging."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(LegtauError):
    """Problem file or expression could not be parsed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(LegtauError):
    """Problem definition is syntactically fine but semantically invalid."""


class TruncationLossWarning(UserWarning):
    """A nonzero coefficient fell off the working dimension.

    Reported, never fatal: composing truncated operational matrices silently
    dropping coefficients is the classic failure mode this guards against.
    """


class QuadratureWarning(UserWarning):
    """Quadrature succeeded but with a larger-than-requested error estimate."""
