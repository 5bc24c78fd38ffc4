"""Exception hierarchy shared by all darboux modules."""


class DarbouxError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(DarbouxError, ValueError):
    pass


class SingularMatrixError(DarbouxError, ArithmeticError):
    def __init__(self, message, pivot=None, cond=None):
        super().__init__(message)
        self.pivot = pivot
        self.cond = cond


class EvaluationError(DarbouxError, ValueError):
    """A coefficient field was evaluated at a point of its exceptional set."""

    def __init__(self, x, field=None):
        where = f" of {field}" if field else ""
        super().__init__(f"coefficient{where} is not evaluable at x={x!r}")
        self.x = x


class DialectError(DarbouxError, ValueError):
    pass


class UsageError(DarbouxError, ValueError):
    pass


class TripleIdentityError(DarbouxError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PropagationDriftError(DarbouxError):
    def __init__(self, message, x=None, residual=None):
        super().__init__(message)
        self.x = x
        self.residual = residual


class ResolventError(SingularMatrixError):
    pass


class NormalizationError(DarbouxError, ValueError):
    pass


class DenominatorSingularError(SingularMatrixError):
    pass


class InvariantViolationError(DarbouxError):
    pass


class DegenerateSpectralParameterError(DarbouxError, ValueError):
    pass
