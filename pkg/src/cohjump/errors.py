"""Exception hierarchy.

Every error raised on bad model data derives from :class:`ModelError`; the
CLI maps those to exit code 1 and prints the class name with the message.
"""

from __future__ import annotations


class ModelError(ValueError):
    """Base class for invalid model data."""


class ShapeMismatch(ModelError):
    pass


class SquareNonzero(ModelError):
    def __init__(self, degree: int, residual: float):
        self.degree = degree
        self.residual = residual
        super().__init__(
            f"differential does not square to zero at degree {degree} "
            f"(residual {residual:.3e})"
        )


class NonHermitianMetric(ModelError):
    pass


class DegreeOutOfRange(ModelError):
    pass


class AntisymmetryViolation(ModelError):
    pass


class LeibnizViolation(ModelError):
    pass


class JacobiViolation(ModelError):
    pass


class NotHarmonic(ModelError):
    pass


class NotClosed(ModelError):
    pass


class CompatibilityViolation(ModelError):
    pass


class DegreeMismatch(ModelError):
    pass


class IntegrabilityFailure(ModelError):
    def __init__(self, order: int, degree: int, residual: float):
        self.order = order
        self.degree = degree
        self.residual = residual
        super().__init__(
            f"integrability fails at order {order}, degree {degree} "
            f"(residual {residual:.3e})"
        )


class OrderExceedsTruncation(ModelError):
    pass


class InconsistentSamples(ModelError):
    """No majority among oracle samples; a tolerance problem, not a verdict."""


class NotSquareZero(ModelError):
    pass
