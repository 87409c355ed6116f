"""Independent cross-checks for the narrow phase.

Deliberately naive: the interval oracle only handles axis-aligned boxes and
the Monte-Carlo oracle converges like 1/sqrt(n). Both avoid every code path
of the clipping kernel so they can arbitrate it.
"""

from __future__ import annotations

import numpy as np

from ..geometry import TriMesh, supporting_planes
from ..geometry.pose import Pose


def interval_box_volume(lo_a, hi_a, lo_b, hi_b) -> float:
    """Overlap volume of two axis-aligned boxes given as corner pairs."""
    lo_a, hi_a = np.asarray(lo_a, dtype=float), np.asarray(hi_a, dtype=float)
    lo_b, hi_b = np.asarray(lo_b, dtype=float), np.asarray(hi_b, dtype=float)
    spans = np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)
    if np.any(spans <= 0.0):
        return 0.0
    return float(spans.prod())


def _world_planes(mesh: TriMesh, pose: Pose):
    planes = supporting_planes(mesh)
    rot = pose.rotation()
    normals = planes[:, :3] @ rot.T
    offsets = planes[:, 3] + normals @ pose.position
    return normals, offsets


def monte_carlo_overlap_volume(
    mesh_a: TriMesh,
    pose_a: Pose,
    mesh_b: TriMesh,
    pose_b: Pose,
    n: int = 1_000_000,
    rng=None,
) -> float:
    """Estimate the intersection volume by rejection sampling.

    Points are drawn uniformly from the intersection of the two world AABBs
    and tested against both bodies' supporting half-spaces.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    va = pose_a.transform_points(mesh_a.vertices)
    vb = pose_b.transform_points(mesh_b.vertices)
    lo = np.maximum(va.min(axis=0), vb.min(axis=0))
    hi = np.minimum(va.max(axis=0), vb.max(axis=0))
    if np.any(hi <= lo):
        return 0.0
    pts = rng.uniform(lo, hi, size=(n, 3))
    inside = np.ones(n, dtype=bool)
    for mesh, pose in ((mesh_a, pose_a), (mesh_b, pose_b)):
        normals, offsets = _world_planes(mesh, pose)
        inside &= np.all(pts @ normals.T <= offsets, axis=1)
    box_volume = float((hi - lo).prod())
    return box_volume * inside.sum() / n
