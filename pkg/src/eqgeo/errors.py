"""Exception hierarchy shared across the package."""


class EqgeoError(Exception):
    """Base class for all package errors."""


class DomainError(EqgeoError):
    """A point (or a finite-difference stencil around it) left the declared
    parameter domain."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


class DegenerateImmersionError(EqgeoError):
    """Jacobian lost full column rank at a point; carries the offending point."""

    def __init__(self, message, point):
        super().__init__(message)
        self.point = tuple(float(c) for c in point)


class MetricError(EqgeoError):
    """Induced metric is not symmetric positive definite where required."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


class SingularPointError(EqgeoError):
    """Closed-form Christoffel denominator vanished (degenerate curve point)."""


class ConvergenceError(EqgeoError):
    """An iterative solver exhausted its budget; carries the best iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class EvalDomainError(EqgeoError):
    """Expression evaluation hit a pole or an invalid argument (log of a
    non-positive number, division by zero, fractional power of a negative)."""


class CurvePositivityError(EqgeoError):
    """A price component of a curve fails strict positivity on the declared
    domain; carries a violating parameter value."""

    def __init__(self, message, t, component=None):
        super().__init__(message)
        self.t = float(t)
        self.component = component
