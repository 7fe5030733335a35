"""Exception hierarchy shared by all ventcel modules."""


class VentcelError(Exception):
    """Base class for every error raised by the package."""


class GeometryError(VentcelError):
    """Invalid polygon, face selector or degenerate geometric entity."""


class GradingError(VentcelError):
    """Mesh grading produced inverted or degenerate elements."""


class AssemblyError(VentcelError):
    """Zero-volume tetrahedron or zero-area surface triangle during assembly."""


class DataError(VentcelError):
    """Non-finite or otherwise unusable function data."""


class ConvergenceError(VentcelError):
    """Iterative solver hit its iteration bound.

    The last iterate and its relative residual are attached so callers can
    decide whether to keep the partial result.
    """

    def __init__(self, message, x=None, residual=None, iterations=None):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.iterations = iterations


class NumericalError(VentcelError):
    """NaN or infinity appeared inside a numerical kernel."""


class LocationError(VentcelError):
    """A query point lies outside the mesh beyond the accepted tolerance."""


class UsageError(VentcelError):
    """Operands are incompatible, e.g. solutions on different domains."""


class ConfigError(VentcelError):
    """Study configuration could not be parsed or validated."""
