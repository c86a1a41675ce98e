"""edgeLBP: local binary patterns of surface relief on polygon meshes.

Typical use::

    from edgelbp import load_mesh, estimate_principal_curvatures, curvature_field, compute_descriptor

    mesh = load_mesh("patch.off")
    k2 = curvature_field(estimate_principal_curvatures(mesh), "k2")
    desc = compute_descriptor(mesh, k2, P=15, n_rings=5, r_max=2.5)
"""

from .curvature import (
    FIELD_NAMES,
    PrincipalCurvatures,
    curvature_field,
    curvedness,
    estimate_principal_curvatures,
    gaussian_curvature,
    mean_curvature,
    shape_index,
)
from .errors import (
    DegenerateNeighborhoodError,
    DegenerateNormalError,
    DegenerateRingError,
    EdgeLBPError,
    EmptyMeshError,
    MultiComponentBoundaryError,
    NoAdmissibleVertexError,
    NonConvexFaceError,
    NonManifoldError,
    NonPlanarFaceError,
    OpenRingError,
    ParamMismatchError,
    ParseError,
    RingError,
    TangentEdgeError,
    UndefinedForSingletonClassError,
)
from .estimator import DescriptorDistance, EdgeLBP, NearestPatternClassifier
from .io import load_mesh, write_obj, write_off
from .lbp import (
    EdgeLbpDescriptor,
    RingSamples,
    compute_descriptor,
    elbp_code,
    load_descriptor,
    ring_resampling,
    rmax_from_area,
    rmax_from_edge_length,
    save_descriptor,
    vertex_codes,
)
from .mesh import (
    SurfaceTessellation,
    VertexField,
    boundary_distance_filter,
    mean_edge_length,
    surface_area,
    vertex_edges,
    vertex_normal,
)
from .retrieval import (
    GroundTruth,
    RetrievalReport,
    confusion_matrix,
    dcg,
    e_measure,
    evaluate,
    nn_ft_st,
    precision_recall,
    rank_lists,
    tier_image,
    write_tier_ppm,
)
from .rings import (
    MultiRing,
    Ring,
    RingPoint,
    edge_sphere_intersection,
    multi_ring,
    ring_extraction,
    sort_ring,
    sphere_crossings,
)
from .similarity import (
    DistanceMatrix,
    bhattacharyya_distance,
    chi_squared_distance,
    distance_matrix,
    euclidean_distance,
)

__version__ = "0.1.0"
