"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): bad input
(:class:`ValidationError`) and numerical trouble (:class:`ComputationError`).
"""


class DiracError(Exception):
    pass


class ValidationError(DiracError, ValueError):
    """Malformed or inconsistent input data."""


class ConfigurationError(ValidationError):
    pass


class ComputationError(DiracError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class RangeError(ComputationError):
    """Non-finite intermediate values (overflow)."""


class BoundaryTooCloseError(ComputationError):
    """A zero of the evaluated function sits on (or near) the contour."""


class WindingError(ComputationError):
    """The discretized argument increment is not close to an integer."""


class LocalizationError(ComputationError):
    pass


class DomainError(ComputationError):
    """Evaluation point outside the region where a representation is valid."""


class ZeroFactorError(DomainError):
    pass


class InsufficientRangeError(ComputationError):
    """Stored data are too short to certify a truncated series."""


class ConstructionError(ComputationError):
    pass


class CapacityError(ComputationError):
    pass
