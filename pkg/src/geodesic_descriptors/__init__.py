"""Geodesic distance descriptors for non-rigid shape correspondence."""

from .basis import (
    GeodesicBasis,
    LowRankFactorization,
    Probe,
    approximate_basis,
    build_factorization,
    exact_basis,
    make_probe,
    nystrom_factorization,
    orthogonalize,
    reconstruct_entry,
    reconstruction_error_curve,
)
from .correspondence import Correspondence
from .descriptors import (
    GeodesicDistanceDescriptor,
    SampledObjective,
    build_gdd,
    descriptor_distance,
    gh_objective_sampled,
    reconstruct_distance,
)
from .evaluation import DistortionCurve, distortion_curve, objective_table
from .exceptions import (
    EigensolverError,
    GeodesicDescriptorError,
    MeshError,
    MeshParseError,
    MeshValidationError,
    NumericalError,
    RankCollapseError,
    UnreachableVertexError,
)
from .geodesics import (
    DistanceField,
    SampleSet,
    distance_matrix,
    farthest_point_sampling,
    geodesic_from,
    geodesic_rows,
)
from .lbo import LboBasis, build_laplacian, lbo_eigenbasis
from .matching import (
    Alignment,
    LandmarkSet,
    icp_match,
    init_from_correspondence,
    init_from_descriptors,
    init_from_landmarks,
    match_landmarks,
    postprocess_lbo,
    procrustes,
)
from .mesh import TriangleMesh, load_mesh, vertex_areas, write_mesh

__version__ = "0.1.0"
