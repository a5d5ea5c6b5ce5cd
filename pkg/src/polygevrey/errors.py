"""Exception types. Each carries a stable ``code`` string used in reports."""


class PolyGevreyError(Exception):
    code = "ERROR"

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details


class DomainError(PolyGevreyError, ValueError):
    code = "DOMAIN"


class SingularSystem(PolyGevreyError, ArithmeticError):
    code = "SINGULAR_SYSTEM"


class SingularPoint(PolyGevreyError, ZeroDivisionError):
    code = "SINGULAR"


class IndexOutOfRange(PolyGevreyError, IndexError):
    code = "INDEX_OUT_OF_RANGE"


class InsufficientData(PolyGevreyError, ValueError):
    code = "INSUFFICIENT_DATA"


class NegativeBeta(PolyGevreyError, ValueError):
    code = "NEGATIVE_BETA"


class NoGeometricDecay(PolyGevreyError, ValueError):
    code = "NO_GEOMETRIC_DECAY"


class Uncertified(PolyGevreyError, ValueError):
    code = "UNCERTIFIED"


class GridTooCoarse(PolyGevreyError, ValueError):
    code = "GRID_TOO_COARSE"


class IllConditioned(UserWarning):
    """Warning raised when a per-mode system has a large condition estimate."""

    code = "ILL_CONDITIONED"
