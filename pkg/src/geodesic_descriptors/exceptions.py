"""Exception hierarchy shared across the package."""


class GeodesicDescriptorError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(GeodesicDescriptorError, ValueError):
    """Invalid mesh input."""


class MeshParseError(MeshError):
    """A mesh file could not be parsed under its declared format."""


class MeshValidationError(MeshError):
    """A parsed mesh violates a structural invariant."""


class NumericalError(GeodesicDescriptorError, ArithmeticError):
    """A numerical procedure failed to produce a usable result."""


class UnreachableVertexError(NumericalError):
    """A geodesic front never reached some vertex."""


class RankCollapseError(NumericalError):
    """The sampled distance submatrix is numerically singular."""

    def __init__(self, message, effective_rank):
        super().__init__(message)
        self.effective_rank = effective_rank


class EigensolverError(NumericalError):
    """An eigensolver returned fewer converged pairs than requested."""

    def __init__(self, message, converged):
        super().__init__(message)
        self.converged = converged
