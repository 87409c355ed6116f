"""Geometry layer: meshes, poses, bounding boxes, and the overlap narrow phase."""

from .aabb import Aabb, aabb_intersection, aabb_overlap, compute_aabb
from .overlap import (
    CLIP_EPS,
    DIRECTION_EPS,
    MIN_VOLUME,
    DirectionIndeterminateError,
    OverlapResult,
    boolean_intersect,
    characterize_overlap,
    direction_vector,
    extract_submesh,
    kernel_backend,
    overlap_quantities,
    quantities_raw,
    triangle_weight,
)
from .pose import (
    Pose,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_normalize,
    quat_rotate,
    quat_to_matrix,
)
from .trimesh import (
    PROV_A,
    PROV_B,
    MeshError,
    TriMesh,
    cuboid,
    icosphere,
    is_closed,
    load_obj,
    mesh_centroid,
    mesh_inertia,
    mesh_volume,
    supporting_planes,
    validate_convex,
)

__all__ = [
    "Aabb",
    "CLIP_EPS",
    "DIRECTION_EPS",
    "DirectionIndeterminateError",
    "MIN_VOLUME",
    "MeshError",
    "OverlapResult",
    "PROV_A",
    "PROV_B",
    "Pose",
    "TriMesh",
    "aabb_intersection",
    "aabb_overlap",
    "boolean_intersect",
    "characterize_overlap",
    "compute_aabb",
    "cuboid",
    "direction_vector",
    "extract_submesh",
    "icosphere",
    "is_closed",
    "kernel_backend",
    "load_obj",
    "mesh_centroid",
    "mesh_inertia",
    "mesh_volume",
    "overlap_quantities",
    "quantities_raw",
    "quat_conjugate",
    "quat_from_axis_angle",
    "quat_mul",
    "quat_normalize",
    "quat_rotate",
    "quat_to_matrix",
    "supporting_planes",
    "triangle_weight",
    "validate_convex",
]
