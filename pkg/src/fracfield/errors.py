"""Exception types shared across the package.

Numerical failures are raised, never returned as NaN: a silent NaN in one
point evaluation poisons every sweep average downstream.
"""


class FracfieldError(Exception):
    """Base class for all package errors."""


class DomainError(FracfieldError):
    """Argument outside the mathematical domain of an operation."""


class NonConvergence(FracfieldError):
    """Quadrature or iteration budget exhausted before the tolerance was met.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, best=None, err_est=None):
        super().__init__(message)
        self.best = best
        self.err_est = err_est


class MonotonicityLoss(FracfieldError):
    """A profile iterate stopped being strictly increasing."""


class RegularityViolation(FracfieldError):
    """Pointwise operator requested where the field is not C^2."""


class OnBoundary(FracfieldError):
    """Indicator Laplacian requested on the interface itself."""


class MedialSet(FracfieldError):
    """Projection onto the boundary is not unique at this point."""


class InvalidEta(FracfieldError):
    """Boundary modification violates the admissibility requirements."""


class SignViolation(FracfieldError):
    """Indicator Laplacian changed sign where it must match the phase."""


class DivergenceDetected(FracfieldError):
    """A refined integral failed its Cauchy test and keeps growing."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PoorFit(FracfieldError):
    """Extrapolation residual above threshold; fit diagnostics attached."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class UnsupportedGeometry(FracfieldError):
    """Operation not implemented for this set descriptor / window."""


class ConfigError(FracfieldError):
    """Malformed or inconsistent suite configuration."""
