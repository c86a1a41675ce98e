"""Exception hierarchy for edgelbp."""


class EdgeLBPError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EdgeLBPError, ValueError):
    """A mesh or descriptor file could not be parsed."""


class EmptyMeshError(EdgeLBPError, ValueError):
    pass


class NonManifoldError(EdgeLBPError, ValueError):
    """An edge is shared by more than two faces."""


class NonConvexFaceError(EdgeLBPError, ValueError):
    pass


class NonPlanarFaceError(NonConvexFaceError):
    """A polygon face deviates from its best-fit plane beyond tolerance."""


class DegenerateNormalError(EdgeLBPError, ArithmeticError):
    pass


class DegenerateNeighborhoodError(EdgeLBPError, ArithmeticError):
    """Curvature averaging neighborhood has zero area."""


class TangentEdgeError(EdgeLBPError, ArithmeticError):
    """An edge endpoint lies on the sphere (within tolerance)."""


class RingError(EdgeLBPError):
    """Base class for ring extraction failures (vertex is non-admissible)."""


class OpenRingError(RingError):
    """The sphere reaches the mesh boundary; the ring cannot be closed."""


class MultiComponentBoundaryError(RingError):
    """The grown region is bounded by more than one closed curve."""


class DegenerateRingError(RingError):
    """Fewer than three ring points, or a ring of zero length."""


class NoAdmissibleVertexError(EdgeLBPError, ValueError):
    pass


class ParamMismatchError(EdgeLBPError, ValueError):
    """Descriptors computed with different (P, N_r, alpha) were compared."""


class UndefinedForSingletonClassError(EdgeLBPError, ValueError):
    pass
