"""Convex boolean intersection and contact-quantity extraction.

Public narrow-phase API: `boolean_intersect` produces the provenance-tagged
intersection surface, `characterize_overlap` adds the contact quantities
(volume v, centroid c, weighted direction s_d), and `overlap_quantities` is
the mesh-free fast path used inside integrator stages.

The quantity accumulation dispatches to a compiled kernel when available;
set GRASPSIM_KERNEL=python or =cython to force a backend.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from . import _overlap_py
from .pose import Pose
from .trimesh import PROV_A, PROV_B, MeshError, TriMesh, ensure_convex, supporting_planes

log = logging.getLogger(__name__)

# Shared narrow-phase tolerances.
CLIP_EPS = 1e-9  # half-space clip slack, meters
MIN_VOLUME = 1e-15  # smallest reportable overlap volume, m^3
DIRECTION_EPS = 1e-12  # below this norm s_d is indeterminate

_MODES = {"centroid": 0, "face_normal": 1}


class DirectionIndeterminateError(RuntimeError):
    """Overlap is so symmetric that the separation direction is undefined."""


def _select_backend():
    choice = os.environ.get("GRASPSIM_KERNEL", "auto").strip().lower() or "auto"
    if choice not in ("auto", "cython", "python"):
        raise ValueError(f"GRASPSIM_KERNEL must be auto/cython/python, got {choice!r}")
    if choice in ("auto", "cython"):
        try:
            from . import _overlap_cy

            return _overlap_cy.overlap_quantities, "cython"
        except ImportError:
            if choice == "cython":
                raise ImportError(
                    "GRASPSIM_KERNEL=cython but the compiled kernel is not built"
                )
            log.debug("compiled overlap kernel unavailable; using pure Python")
    return _overlap_py.overlap_quantities, "python"


_kernel_quantities, _backend = _select_backend()


def kernel_backend() -> str:
    """Name of the active quantity-accumulation backend."""
    return _backend


@dataclass
class OverlapResult:
    intersection: TriMesh
    c: np.ndarray
    v: float
    s_d: np.ndarray
    s_n: np.ndarray


def _world_geometry(mesh: TriMesh, pose: Pose):
    """World vertices and world supporting planes for one posed mesh."""
    verts = pose.transform_points(mesh.vertices)
    planes = supporting_planes(mesh)
    rot = pose.rotation()
    normals = np.ascontiguousarray(planes[:, :3] @ rot.T)
    offsets = np.ascontiguousarray(planes[:, 3] + normals @ pose.position)
    return np.ascontiguousarray(verts), normals, offsets


def boolean_intersect(
    mesh_a: TriMesh, pose_a: Pose, mesh_b: TriMesh, pose_b: Pose
) -> TriMesh | None:
    """Intersection surface of two posed convex meshes, provenance-tagged.

    Returns None for disjoint interiors or a contact thinner than the
    reportable volume floor.
    """
    ensure_convex(mesh_a)
    ensure_convex(mesh_b)
    va, pna, pda = _world_geometry(mesh_a, pose_a)
    vb, pnb, pdb = _world_geometry(mesh_b, pose_b)
    frags = _overlap_py.intersection_fragments(
        va, mesh_a.triangles, pna, pda, vb, mesh_b.triangles, pnb, pdb, CLIP_EPS
    )
    if not frags:
        return None
    tri_list = []
    tags = []
    for tag, poly in frags:
        for i in range(1, len(poly) - 1):
            tri_list.append((poly[0], poly[i], poly[i + 1]))
            tags.append(tag)
    corners = np.array(tri_list)  # (m, 3, 3)
    mesh = TriMesh(
        corners.reshape(-1, 3),
        np.arange(3 * len(tri_list), dtype=np.int32).reshape(-1, 3),
        provenance=np.array(tags, dtype=np.uint8),
    )
    from .trimesh import mesh_volume

    if mesh_volume(mesh, check_closed=False) <= MIN_VOLUME:
        return None
    return mesh


def extract_submesh(intersection: TriMesh, tag: int) -> TriMesh:
    """Triangles of the intersection surface contributed by one body."""
    if intersection.provenance is None:
        raise MeshError("extract_submesh requires provenance tags")
    if tag not in (PROV_A, PROV_B):
        raise ValueError(f"tag must be PROV_A or PROV_B, got {tag}")
    sel = intersection.provenance == tag
    kept = intersection.triangles[sel]
    return TriMesh(intersection.vertices, kept, provenance=intersection.provenance[sel])


def triangle_weight(tri: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    """Pyramid weight and direction for one intersection facet.

    omega = area * depth / 3 with depth the centroid-to-c distance; n is the
    unit vector from the facet centroid toward c. A facet whose centroid
    coincides with c (depth < 1e-12) contributes (0, zero vector).
    """
    tri = np.asarray(tri, dtype=float).reshape(3, 3)
    c = np.asarray(c, dtype=float).reshape(3)
    g = tri.mean(axis=0)
    diff = c - g
    depth = float(np.linalg.norm(diff))
    if depth < 1e-12:
        return 0.0, np.zeros(3)
    area = 0.5 * float(np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0])))
    return area * depth / 3.0, diff / depth


def direction_vector(
    intersection: TriMesh, c: np.ndarray, mode: str = "centroid"
) -> np.ndarray:
    """Weighted separation direction s_d = sum_A omega*n - sum_B omega*n.

    The sign convention: pushing body A along s_d separates the pair. One
    empty provenance class is fine (full containment); a vanishing total
    raises DirectionIndeterminateError.
    """
    if intersection.provenance is None:
        raise MeshError("direction_vector requires provenance tags")
    if mode not in _MODES:
        raise ValueError(f"unknown direction mode {mode!r}")
    c = np.asarray(c, dtype=float).reshape(3)
    sums = np.zeros((2, 3))
    corners = intersection.corners()
    for tri, tag in zip(corners, intersection.provenance):
        if mode == "centroid":
            w, n = triangle_weight(tri, c)
            sums[tag] += w * n
        else:
            g = tri.mean(axis=0)
            depth = float(np.linalg.norm(c - g))
            if depth < 1e-12:
                continue
            avec = 0.5 * np.cross(tri[1] - tri[0], tri[2] - tri[0])
            area = float(np.linalg.norm(avec))
            if area <= 0.0:
                continue
            # omega * inward unit normal; the facet's outward normal points
            # out of the intersection volume by construction.
            sums[tag] += (area * depth / 3.0) * (-avec / area)
    s_d = sums[0] - sums[1]
    if np.linalg.norm(s_d) < DIRECTION_EPS:
        raise DirectionIndeterminateError("indeterminate direction")
    return s_d


def quantities_raw(
    mesh_a: TriMesh, pose_a: Pose, mesh_b: TriMesh, pose_b: Pose, mode: str = "centroid"
):
    """Kernel quantities (v, c, s_d) with no direction policy applied.

    Returns None when there is no reportable overlap. Callers that cannot
    tolerate an indeterminate direction should use overlap_quantities; the
    simulation loop uses this form so it can keep the volume signal alive
    while skipping the force of a degenerate overlap.
    """
    ensure_convex(mesh_a)
    ensure_convex(mesh_b)
    if mode not in _MODES:
        raise ValueError(f"unknown direction mode {mode!r}")
    va, pna, pda = _world_geometry(mesh_a, pose_a)
    vb, pnb, pdb = _world_geometry(mesh_b, pose_b)
    raw = _kernel_quantities(
        va, mesh_a.triangles, pna, pda,
        vb, mesh_b.triangles, pnb, pdb,
        CLIP_EPS, MIN_VOLUME, _MODES[mode],
    )
    if raw is None:
        return None
    v, cx, cy, cz, sx, sy, sz = raw
    return float(v), np.array([cx, cy, cz]), np.array([sx, sy, sz])


def overlap_quantities(
    mesh_a: TriMesh, pose_a: Pose, mesh_b: TriMesh, pose_b: Pose, mode: str = "centroid"
):
    """Contact quantities (v, c, s_d, s_n) without building the soup mesh.

    Returns None when there is no reportable overlap; raises
    DirectionIndeterminateError on a degenerate symmetric overlap.
    """
    raw = quantities_raw(mesh_a, pose_a, mesh_b, pose_b, mode)
    if raw is None:
        return None
    v, c, s_d = raw
    norm = float(np.linalg.norm(s_d))
    if norm < DIRECTION_EPS:
        raise DirectionIndeterminateError("indeterminate direction")
    return v, c, s_d, s_d / norm


def characterize_overlap(
    mesh_a: TriMesh, pose_a: Pose, mesh_b: TriMesh, pose_b: Pose, mode: str = "centroid"
) -> OverlapResult | None:
    """Full overlap characterization: intersection mesh plus (v, c, s_d, s_n).

    The quantities come from the fused per-provenance accumulation (exact
    A/B-swap antisymmetry); a test pins its agreement with the composition
    of mesh_volume / mesh_centroid / direction_vector on the soup mesh.
    """
    quantities = overlap_quantities(mesh_a, pose_a, mesh_b, pose_b, mode)
    if quantities is None:
        return None
    v, c, s_d, s_n = quantities
    mesh = boolean_intersect(mesh_a, pose_a, mesh_b, pose_b)
    if mesh is None:  # pragma: no cover - floor handled identically above
        return None
    return OverlapResult(intersection=mesh, c=c, v=v, s_d=s_d, s_n=s_n)
