"""Axis-aligned bounding boxes for the contact broad phase."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pose import Pose
from .trimesh import MeshError, TriMesh


@dataclass(frozen=True)
class Aabb:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(3))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(3))
        if np.any(self.hi < self.lo):
            raise ValueError(f"inverted bounds: lo={self.lo}, hi={self.hi}")

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)


def compute_aabb(mesh: TriMesh, pose: Pose) -> Aabb:
    """Exact bounds of the posed vertices (tight for the convex hull)."""
    if len(mesh.vertices) == 0:
        raise MeshError("cannot bound an empty mesh")
    world = pose.transform_points(mesh.vertices)
    return Aabb(world.min(axis=0), world.max(axis=0))


def aabb_overlap(a: Aabb, b: Aabb) -> bool:
    """True when the boxes intersect; shared faces/edges/corners count."""
    return bool(np.all(a.lo <= b.hi) and np.all(b.lo <= a.hi))


def aabb_intersection(a: Aabb, b: Aabb) -> Aabb | None:
    lo = np.maximum(a.lo, b.lo)
    hi = np.minimum(a.hi, b.hi)
    if np.any(hi < lo):
        return None
    return Aabb(lo, hi)
