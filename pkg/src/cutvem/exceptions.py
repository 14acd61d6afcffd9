"""Exception hierarchy shared by the mesh, kernel and solver layers."""


class CutVEMError(Exception):
    """Base class for all errors raised by cutvem."""


class GeometryError(CutVEMError):
    """The interface is not resolved by the background mesh."""


class MultipleRoots(GeometryError):
    """The level set changes sign more than once along a single edge."""


class AssumptionAViolation(GeometryError):
    """A background triangle is cut in a way other than two points on two edges."""


class AssumptionBViolation(GeometryError):
    """An interface triangle touches the boundary of the domain."""


class NonConvexQuad(CutVEMError):
    pass


class DegenerateTriangle(CutVEMError):
    pass


class MissingBoundaryValue(CutVEMError):
    pass


class NoConvergence(CutVEMError):
    """Conjugate gradients hit the iteration cap before reaching the tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
