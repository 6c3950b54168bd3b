"""Exception taxonomy shared by all zetachain modules.

Two families matter for the CLI exit code: ``ValidationError`` (bad or
inadmissible input, exit 2) and ``NumericalError`` (a solver or quadrature
failed to settle, exit 3).
"""


class ZetaChainError(Exception):
    exit_code = 3


class ValidationError(ZetaChainError):
    exit_code = 2


class NumericalError(ZetaChainError):
    exit_code = 3


class UsageError(ValidationError):
    pass


# Moebius / hyperbolic trigonometry
class NegativeDeterminant(ValidationError):
    pass


class NotHyperbolic(ValidationError):
    pass


class FixedPointAtInfinity(ValidationError):
    pass


class NonpositiveRadius(ValidationError):
    pass


class DisksOverlap(ValidationError):
    pass


class NonpositiveSide(ValidationError):
    pass


# Scheme construction
class NonpositiveLength(ValidationError):
    pass


class IsometricCirclesOverlap(ValidationError):
    pass


class TriangleConditionViolated(ValidationError):
    pass


class BelowLengthThreshold(ValidationError):
    pass


class NewtonDivergence(NumericalError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


# Symbolic dynamics
class CapExceeded(ValidationError):
    pass


class NotClosed(ValidationError):
    pass


class WrongKind(ValidationError):
    pass


# Zeta evaluation
class OrderExceedsDatabase(ValidationError):
    pass


class ConvergenceRegionViolated(ValidationError):
    pass


# Root finding
class DerivativeVanished(NumericalError):
    pass


class ContourTooCloseToZero(NumericalError):
    pass


class NonIntegerResult(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


# Chain polynomial
class NonpositiveEntry(ValidationError):
    pass


class IterationStalled(NumericalError):
    pass


class WindowMismatch(ValidationError):
    pass


class WindowBoundaryTouchesChain(ValidationError):
    pass
