"""Multi-view point cloud registration toolkit.

Pairwise ICP with an adaptive convergence threshold, SE(3) motion
averaging for multi-view alignment, and saliency-driven 3D face
retrieval, with PLY I/O and a batch CLI.
"""

from .averaging import (
    IncidenceSystem,
    ViewGraph,
    apply_corrections,
    build_incidence_system,
    edge_correction,
    motion_average,
    solve_corrections,
)
from .cloud import (
    Correspondence,
    PointCloud,
    adaptive_threshold,
    count_coincident,
    estimate_resolution,
    nearest_neighbors,
)
from .config import RunConfig, config_from_dict, read_config
from .geometry import (
    RigidMotion,
    Twist,
    cev,
    compose,
    exp_map,
    inverse,
    log_map,
    read_transform,
    rotation_angle,
    vec,
    write_transform,
)
from .icp import IcpConfig, IcpResult, fit_rigid, icp_adaptive
from .pipeline import (
    PipelineConfig,
    RegistrationReport,
    compute_overlap,
    iteration_error,
    objective_value,
    perturb_graph,
    register_multiview,
)
from .ply import PlyDocument, read_ply, write_ply
from .retrieval import (
    FacialTriangle,
    RetrievalResult,
    match_triangle,
    read_standard_triangle,
    retrieve_faces,
    write_standard_triangle,
)
from .saliency import (
    RetrievalConfig,
    SaliencyField,
    SalientCluster,
    TriangleMesh,
    cluster_salient,
    mean_curvature,
    saliency,
    weighted_curvature,
)

__version__ = "0.1.0"
