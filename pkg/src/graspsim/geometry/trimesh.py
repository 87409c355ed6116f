"""Triangle meshes: containers, generators, integral properties, validation.

Meshes are indexed triangle lists with outward CCW winding. Intersection
outputs are "soup" meshes (one vertex triple per triangle) carrying a
per-triangle provenance tag that records which input surface each facet
came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Provenance tags for boolean-intersection facets.
PROV_A = 0
PROV_B = 1

# Planarity / convexity tolerance in meters, shared with the clip kernel.
GEOM_EPS = 1e-9

# Triangles with less area than this are considered degenerate.
DEGENERATE_AREA = 1e-12


class MeshError(ValueError):
    """A mesh failed structural validation."""


@dataclass
class TriMesh:
    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int32, CCW outward
    provenance: np.ndarray | None = None  # (m,) uint8, intersection soups only

    _planes: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _convex_checked: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int32)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {self.vertices.shape}")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError(f"triangles must be (m, 3), got {self.triangles.shape}")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshError("triangle indices out of range")
        if self.provenance is not None:
            self.provenance = np.ascontiguousarray(self.provenance, dtype=np.uint8)
            if self.provenance.shape != (len(self.triangles),):
                raise MeshError("provenance must have one tag per triangle")

    def __len__(self) -> int:
        return len(self.triangles)

    def corners(self) -> np.ndarray:
        """Per-triangle corner coordinates, shape (m, 3, 3)."""
        return self.vertices[self.triangles]


def triangle_area_vectors(mesh: TriMesh) -> np.ndarray:
    """Outward area vectors (normal * area) for every triangle."""
    p = mesh.corners()
    return 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])


def cuboid(extents) -> TriMesh:
    """Axis-aligned box centered at the origin; extents are full side lengths."""
    ex = np.asarray(extents, dtype=float).reshape(3)
    if np.any(ex <= 0.0):
        raise MeshError(f"cuboid extents must be positive, got {ex}")
    hx, hy, hz = 0.5 * ex
    vertices = np.array(
        [
            [-hx, -hy, -hz],
            [hx, -hy, -hz],
            [hx, hy, -hz],
            [-hx, hy, -hz],
            [-hx, -hy, hz],
            [hx, -hy, hz],
            [hx, hy, hz],
            [-hx, hy, hz],
        ]
    )
    triangles = np.array(
        [
            [0, 3, 2], [0, 2, 1],  # -z
            [4, 5, 6], [4, 6, 7],  # +z
            [0, 1, 5], [0, 5, 4],  # -y
            [2, 3, 7], [2, 7, 6],  # +y
            [0, 4, 7], [0, 7, 3],  # -x
            [1, 2, 6], [1, 6, 5],  # +x
        ],
        dtype=np.int32,
    )
    return TriMesh(vertices, triangles)


_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosphere(radius: float, subdivisions: int = 2) -> TriMesh:
    """Geodesic sphere from a subdivided icosahedron, centered at the origin."""
    if radius <= 0.0:
        raise MeshError(f"icosphere radius must be positive, got {radius}")
    if subdivisions < 0:
        raise MeshError("subdivisions must be >= 0")
    t = (1.0 + np.sqrt(5.0)) / 2.0
    raw = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    verts = [v / np.linalg.norm(v) for v in raw]
    faces = list(_ICO_FACES)
    for _ in range(subdivisions):
        midpoint: dict[tuple[int, int], int] = {}

        def midpt(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        split = []
        for a, b, c in faces:
            ab, bc, ca = midpt(a, b), midpt(b, c), midpt(c, a)
            split += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = split
    vertices = radius * np.array(verts)
    triangles = np.array(faces, dtype=np.int32)
    # Enforce outward winding regardless of the face table's conventions.
    p = vertices[triangles]
    outward = np.einsum(
        "ij,ij->i", np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), p.mean(axis=1)
    )
    flip = outward < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return TriMesh(vertices, triangles)


def load_obj(path) -> TriMesh:
    """Load a watertight triangle mesh from a Wavefront OBJ file.

    Supports v/f records (fans for polygonal faces, negative indices,
    v/vt/vn syntax); everything else is ignored.
    """
    vertices: list[list[float]] = []
    triangles: list[tuple[int, int, int]] = []
    path = Path(path)
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex needs 3 coordinates")
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = []
                for token in parts[1:]:
                    raw = token.split("/")[0]
                    i = int(raw)
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                if len(idx) < 3:
                    raise MeshError(f"{path}:{lineno}: face needs >= 3 vertices")
                for k in range(1, len(idx) - 1):
                    triangles.append((idx[0], idx[k], idx[k + 1]))
    if not vertices or not triangles:
        raise MeshError(f"{path}: no usable geometry found")
    return TriMesh(np.array(vertices), np.array(triangles, dtype=np.int32))


def weld_vertices(
    points: np.ndarray, tol: float = GEOM_EPS
) -> tuple[np.ndarray, np.ndarray]:
    """Merge points within tol; returns (index map, representative points).

    Points are snapped to a grid of pitch tol and matched against the 27
    neighboring cells, so near-coincident points straddling a cell border
    still weld together.
    """
    points = np.asarray(points, dtype=float)
    keys = np.floor(points / tol).astype(np.int64)
    cells: dict[tuple[int, int, int], list[int]] = {}
    out = np.empty(len(points), dtype=np.int64)
    reps: list[np.ndarray] = []
    for i, (pt, key) in enumerate(zip(points, keys)):
        found = -1
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    bucket = cells.get((key[0] + dx, key[1] + dy, key[2] + dz))
                    if not bucket:
                        continue
                    for j in bucket:
                        if np.max(np.abs(reps[j] - pt)) <= tol:
                            found = j
                            break
                    if found >= 0:
                        break
                if found >= 0:
                    break
            if found >= 0:
                break
        if found < 0:
            found = len(reps)
            reps.append(pt)
            cells.setdefault(tuple(key), []).append(found)
        out[i] = found
    return out, np.array(reps).reshape(-1, 3)


def _edge_defects(triangles: np.ndarray) -> tuple[int, int]:
    """Count boundary edges and inconsistently oriented edge pairings.

    Returns (open_edges, bad_orientation): a closed, consistently wound
    surface has every directed edge appearing exactly once with its reverse
    also present.
    """
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in triangles:
        for e in ((a, b), (b, c), (c, a)):
            counts[e] = counts.get(e, 0) + 1
    open_edges = 0
    bad = 0
    for (a, b), n in counts.items():
        rev = counts.get((b, a), 0)
        if n != 1:
            bad += 1
        elif rev == 0:
            open_edges += 1
    return open_edges, bad


def _welded_triangles(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray]:
    """Triangle index array rewritten through coordinate welding.

    Intersection soups duplicate vertices per facet; welding recovers the
    connectivity needed by edge-based closure checks.
    """
    remap, reps = weld_vertices(mesh.vertices)
    return remap[mesh.triangles], reps


def _split_edge_cancellation(triangles: np.ndarray, reps: np.ndarray, tol: float) -> bool:
    """Closure check that tolerates T-junctions from face clipping.

    Clipped fragments can place a vertex in the middle of a neighboring
    fragment's edge, so plain edge pairing reports false boundaries. Split
    every directed edge at welded vertices lying on it, then require the
    signed sub-edge counts to cancel (each (a, b) matched by a (b, a)).
    """
    counts: dict[tuple[int, int], int] = {}
    ids = np.arange(len(reps))
    for tri in triangles:
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            if u == v:
                continue
            p, q = reps[u], reps[v]
            axis = q - p
            length2 = float(axis @ axis)
            t = (reps - p) @ axis / length2
            interior = (t > 1e-9) & (t < 1.0 - 1e-9)
            perp = reps - p - t[:, None] * axis
            on_line = np.einsum("ij,ij->i", perp, perp) <= tol * tol
            mids = ids[interior & on_line & (ids != u) & (ids != v)]
            chain = [u, *mids[np.argsort(t[mids])].tolist(), v]
            for a, b in zip(chain, chain[1:]):
                counts[(a, b)] = counts.get((a, b), 0) + 1
    return all(n == counts.get((b, a), 0) for (a, b), n in counts.items())


def is_closed(mesh: TriMesh) -> bool:
    """True when the surface is geometrically watertight.

    Fast path: directed-edge pairing on welded vertex indices. Intersection
    soups with T-junction vertices fall back to the split-edge cancellation
    test.
    """
    triangles, reps = _welded_triangles(mesh)
    open_edges, bad = _edge_defects(triangles)
    if open_edges == 0 and bad == 0:
        return True
    return _split_edge_cancellation(triangles, reps, GEOM_EPS)


def mesh_volume(mesh: TriMesh, check_closed: bool = True) -> float:
    """Enclosed volume by the divergence theorem: (1/6) sum (p1 x p2) . p3."""
    if check_closed and not is_closed(mesh):
        raise MeshError("mesh_volume requires a closed surface")
    p = mesh.corners()
    return float(np.einsum("ij,ij->i", np.cross(p[:, 0], p[:, 1]), p[:, 2]).sum() / 6.0)


def mesh_centroid(mesh: TriMesh, check_closed: bool = True) -> np.ndarray:
    """Volume centroid via signed tetrahedra against the origin."""
    if check_closed and not is_closed(mesh):
        raise MeshError("mesh_centroid requires a closed surface")
    p = mesh.corners()
    det = np.einsum("ij,ij->i", np.cross(p[:, 0], p[:, 1]), p[:, 2])
    vol6 = det.sum()
    if abs(vol6) < 6.0 * 1e-30:
        raise MeshError("mesh_centroid undefined for zero enclosed volume")
    moments = (det[:, None] * p.sum(axis=1)).sum(axis=0) / 4.0
    return moments / vol6


def mesh_inertia(mesh: TriMesh, mass: float) -> np.ndarray:
    """Inertia tensor about the volume centroid for a uniform-density solid.

    Signed-tetrahedron covariance accumulation; the canonical-tetrahedron
    second moments give C = det/120 * (sum_i p_i p_i^T + s s^T) with
    s = p0+p1+p2, folded over all facets and converted via I = tr(C)*1 - C.
    """
    if mass <= 0.0:
        raise MeshError(f"mass must be positive, got {mass}")
    p = mesh.corners()
    det = np.einsum("ij,ij->i", np.cross(p[:, 0], p[:, 1]), p[:, 2])
    vol = det.sum() / 6.0
    if vol <= 0.0:
        raise MeshError("mesh_inertia requires positive enclosed volume")
    s = p.sum(axis=1)
    cov = np.einsum("k,kim,kin->mn", det, p, p) + np.einsum("k,km,kn->mn", det, s, s)
    cov /= 120.0
    cov *= mass / vol  # density scaling
    centroid = (det[:, None] * s).sum(axis=0) / 4.0 / (6.0 * vol)
    # Shift the covariance from the origin to the centroid before converting.
    cov -= mass * np.outer(centroid, centroid)
    return np.trace(cov) * np.eye(3) - cov


def supporting_planes(mesh: TriMesh) -> np.ndarray:
    """Deduplicated face planes as rows (nx, ny, nz, d) with n . x <= d inside.

    Cached on the mesh: plane extraction runs once per distinct mesh object.
    """
    if mesh._planes is not None:
        return mesh._planes
    areas = triangle_area_vectors(mesh)
    norms = np.linalg.norm(areas, axis=1)
    keep = norms > DEGENERATE_AREA
    normals = areas[keep] / norms[keep, None]
    offsets = np.einsum("ij,ij->i", normals, mesh.vertices[mesh.triangles[keep, 0]])
    planes = np.empty((len(normals), 4))
    count = 0
    for n, d in zip(normals, offsets):
        head = planes[:count]
        if count and np.any(
            (head[:, :3] @ n > 1.0 - GEOM_EPS) & (np.abs(head[:, 3] - d) <= GEOM_EPS)
        ):
            continue
        planes[count, :3] = n
        planes[count, 3] = d
        count += 1
    mesh._planes = np.ascontiguousarray(planes[:count])
    return mesh._planes


def validate_convex(mesh: TriMesh, tol: float = GEOM_EPS) -> None:
    """Raise MeshError unless the mesh is a closed, outward, convex surface.

    Checks: no degenerate facets, watertight with consistent winding,
    positive enclosed volume, and every vertex on or behind every supporting
    plane (within tol).
    """
    problems = []
    if len(mesh) < 4:
        problems.append(f"too few triangles ({len(mesh)}) to bound a volume")
    areas = np.linalg.norm(triangle_area_vectors(mesh), axis=1) if len(mesh) else np.array([])
    if np.any(areas <= DEGENERATE_AREA):
        problems.append(f"{int((areas <= DEGENERATE_AREA).sum())} degenerate triangle(s)")
    open_edges, bad = _edge_defects(_welded_triangles(mesh)[0])
    if open_edges or bad:
        problems.append(
            f"surface not closed/consistently wound ({open_edges} open, {bad} bad edges)"
        )
    else:
        if mesh_volume(mesh, check_closed=False) <= 0.0:
            problems.append("winding encloses non-positive volume (normals point inward?)")
    if not problems:
        planes = supporting_planes(mesh)
        slack = planes[:, :3] @ mesh.vertices.T - planes[:, 3:4]
        worst = float(slack.max(initial=0.0))
        if worst > tol:
            problems.append(f"not convex: vertex protrudes {worst:.3e} beyond a face plane")
    if problems:
        raise MeshError("; ".join(problems))
    mesh._convex_checked = True


def ensure_convex(mesh: TriMesh) -> None:
    """validate_convex, amortized: runs once per mesh object."""
    if not mesh._convex_checked:
        validate_convex(mesh)
