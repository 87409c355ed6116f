"""Pure-Python overlap kernel.

Enumerates the boundary fragments of the boolean intersection of two convex
meshes (each body's faces clipped against the other's supporting half-spaces)
and folds them into the contact quantities: volume, volume centroid, and the
weighted separation direction.

`overlap_quantities` here is the fallback for the compiled twin in
_overlap_cy.pyx; keep the arithmetic in the two files identical, including
accumulation order, so the backends agree to rounding error.
"""

from math import sqrt

# Fragments of the second mesh are dropped when coplanar with a face plane of
# the first (same outward direction): both surfaces would otherwise emit the
# shared patch, double-counting it and breaking watertightness.


def _clip_halfspace(poly, nx, ny, nz, d, eps):
    """Sutherland-Hodgman clip of a convex polygon against n.x <= d + eps."""
    out = []
    m = len(poly)
    for i in range(m):
        ax, ay, az = poly[i]
        j = i + 1
        if j == m:
            j = 0
        bx, by, bz = poly[j]
        sa = nx * ax + ny * ay + nz * az - d
        sb = nx * bx + ny * by + nz * bz - d
        a_in = sa <= eps
        b_in = sb <= eps
        if a_in:
            out.append((ax, ay, az))
        if a_in != b_in:
            # Clamp the crossing to the segment: with the slackened inside
            # test the denominator can be arbitrarily small when an edge
            # grazes the plane, and an unclamped t throws the point far off.
            t = sa / (sa - sb)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            out.append((ax + t * (bx - ax), ay + t * (by - ay), az + t * (bz - az)))
    return out


def _side_fragments(verts, tris, clip_n, clip_d, cop_n, cop_d, ovlo, ovhi, eps, tag, out):
    """Clip one mesh's faces against the other's half-spaces into `out`.

    cop_n/cop_d carry the *other* mesh's planes for the coplanar-drop rule
    (pass None for the first side, which keeps its coplanar fragments).
    Faces are pre-culled against the shared AABB-overlap region; clip planes
    that cannot cut the culled region are skipped (they classify every point
    as inside, so the clip would be the identity).
    """
    margin = 2.0 * eps
    ox0, oy0, oz0 = ovlo[0] - margin, ovlo[1] - margin, ovlo[2] - margin
    ox1, oy1, oz1 = ovhi[0] + margin, ovhi[1] + margin, ovhi[2] + margin

    kept = []
    kx0 = ky0 = kz0 = float("inf")
    kx1 = ky1 = kz1 = float("-inf")
    for f in range(len(tris)):
        i0, i1, i2 = tris[f]
        p0, p1, p2 = verts[i0], verts[i1], verts[i2]
        fx0 = min(p0[0], p1[0], p2[0])
        fx1 = max(p0[0], p1[0], p2[0])
        if fx0 > ox1 or fx1 < ox0:
            continue
        fy0 = min(p0[1], p1[1], p2[1])
        fy1 = max(p0[1], p1[1], p2[1])
        if fy0 > oy1 or fy1 < oy0:
            continue
        fz0 = min(p0[2], p1[2], p2[2])
        fz1 = max(p0[2], p1[2], p2[2])
        if fz0 > oz1 or fz1 < oz0:
            continue
        kept.append(f)
        kx0 = min(kx0, fx0)
        ky0 = min(ky0, fy0)
        kz0 = min(kz0, fz0)
        kx1 = max(kx1, fx1)
        ky1 = max(ky1, fy1)
        kz1 = max(kz1, fz1)
    if not kept:
        return

    active = []
    for k in range(len(clip_n)):
        nx, ny, nz = clip_n[k]
        d = clip_d[k]
        reach = (
            (nx * kx1 if nx > 0.0 else nx * kx0)
            + (ny * ky1 if ny > 0.0 else ny * ky0)
            + (nz * kz1 if nz > 0.0 else nz * kz0)
        )
        if reach - d > eps:
            active.append(k)

    for f in kept:
        i0, i1, i2 = tris[f]
        p0, p1, p2 = verts[i0], verts[i1], verts[i2]
        if cop_n is not None and _coplanar_with_any(p0, p1, p2, cop_n, cop_d, eps):
            continue
        poly = [p0, p1, p2]
        for k in active:
            nx, ny, nz = clip_n[k]
            poly = _clip_halfspace(poly, nx, ny, nz, clip_d[k], eps)
            if len(poly) < 3:
                break
        if len(poly) >= 3:
            out.append((tag, poly))


def _coplanar_with_any(p0, p1, p2, planes_n, planes_d, eps):
    """True when the triangle lies in one of the planes with matching direction."""
    ux, uy, uz = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    vx, vy, vz = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    fnx = uy * vz - uz * vy
    fny = uz * vx - ux * vz
    fnz = ux * vy - uy * vx
    for k in range(len(planes_n)):
        nx, ny, nz = planes_n[k]
        d = planes_d[k]
        if nx * fnx + ny * fny + nz * fnz <= 0.0:
            continue
        if (
            abs(nx * p0[0] + ny * p0[1] + nz * p0[2] - d) <= eps
            and abs(nx * p1[0] + ny * p1[1] + nz * p1[2] - d) <= eps
            and abs(nx * p2[0] + ny * p2[1] + nz * p2[2] - d) <= eps
        ):
            return True
    return False


def _overlap_box(va, vb, eps):
    """Intersection of the two vertex-cloud AABBs, or None when separated."""
    alo = va.min(axis=0)
    ahi = va.max(axis=0)
    blo = vb.min(axis=0)
    bhi = vb.max(axis=0)
    margin = 2.0 * eps
    lo = (max(alo[0], blo[0]), max(alo[1], blo[1]), max(alo[2], blo[2]))
    hi = (min(ahi[0], bhi[0]), min(ahi[1], bhi[1]), min(ahi[2], bhi[2]))
    for i in range(3):
        if lo[i] - margin > hi[i] + margin:
            return None
    return lo, hi


def intersection_fragments(va, ta, pna, pda, vb, tb, pnb, pdb, eps):
    """All boundary fragments of the intersection as (tag, polygon) pairs.

    Inputs are world-space vertex/triangle arrays and unit supporting planes
    (n, d) with inside given by n.x <= d. Tags: 0 = from mesh A, 1 = from B.
    """
    box = _overlap_box(va, vb, eps)
    if box is None:
        return []
    ovlo, ovhi = box
    a_verts = [tuple(p) for p in va.tolist()]
    b_verts = [tuple(p) for p in vb.tolist()]
    a_tris = ta.tolist()
    b_tris = tb.tolist()
    b_clip_n = [tuple(n) for n in pnb.tolist()]
    b_clip_d = pdb.tolist()
    a_clip_n = [tuple(n) for n in pna.tolist()]
    a_clip_d = pda.tolist()
    out: list = []
    _side_fragments(a_verts, a_tris, b_clip_n, b_clip_d, None, None, ovlo, ovhi, eps, 0, out)
    _side_fragments(b_verts, b_tris, a_clip_n, a_clip_d, a_clip_n, a_clip_d, ovlo, ovhi, eps, 1, out)
    return out


def overlap_quantities(va, ta, pna, pda, vb, tb, pnb, pdb, eps, min_volume, mode):
    """Fused volume / centroid / direction accumulation over the fragments.

    Returns (v, cx, cy, cz, sdx, sdy, sdz) or None when the reportable
    volume is at or below min_volume. mode 0 weights fragments by unit
    vectors toward the centroid; mode 1 uses inward facet normals.

    All sums are accumulated separately per provenance tag and combined
    commutatively, so swapping A and B gives bitwise-identical v and c and
    an exactly negated direction.
    """
    frags = intersection_fragments(va, ta, pna, pda, vb, tb, pnb, pdb, eps)
    if not frags:
        return None
    box = _overlap_box(va, vb, eps)
    rx = 0.5 * (box[0][0] + box[1][0])
    ry = 0.5 * (box[0][1] + box[1][1])
    rz = 0.5 * (box[0][2] + box[1][2])

    vol6 = [0.0, 0.0]
    momx = [0.0, 0.0]
    momy = [0.0, 0.0]
    momz = [0.0, 0.0]
    fan = []  # (tag, gx, gy, gz, ax, ay, az): centroid and area vector, ref-relative
    for tag, poly in frags:
        q0 = poly[0]
        x0, y0, z0 = q0[0] - rx, q0[1] - ry, q0[2] - rz
        for i in range(1, len(poly) - 1):
            qi = poly[i]
            qj = poly[i + 1]
            x1, y1, z1 = qi[0] - rx, qi[1] - ry, qi[2] - rz
            x2, y2, z2 = qj[0] - rx, qj[1] - ry, qj[2] - rz
            cxp = y0 * z1 - z0 * y1
            cyp = z0 * x1 - x0 * z1
            czp = x0 * y1 - y0 * x1
            det = cxp * x2 + cyp * y2 + czp * z2
            vol6[tag] += det
            momx[tag] += det * (x0 + x1 + x2)
            momy[tag] += det * (y0 + y1 + y2)
            momz[tag] += det * (z0 + z1 + z2)
            ux, uy, uz = x1 - x0, y1 - y0, z1 - z0
            wx, wy, wz = x2 - x0, y2 - y0, z2 - z0
            fan.append(
                (
                    tag,
                    (x0 + x1 + x2) / 3.0,
                    (y0 + y1 + y2) / 3.0,
                    (z0 + z1 + z2) / 3.0,
                    0.5 * (uy * wz - uz * wy),
                    0.5 * (uz * wx - ux * wz),
                    0.5 * (ux * wy - uy * wx),
                )
            )

    vol6_sum = vol6[0] + vol6[1]
    v = vol6_sum / 6.0
    if v <= min_volume:
        return None
    cx = (momx[0] + momx[1]) / (4.0 * vol6_sum)
    cy = (momy[0] + momy[1]) / (4.0 * vol6_sum)
    cz = (momz[0] + momz[1]) / (4.0 * vol6_sum)

    sdx = [0.0, 0.0]
    sdy = [0.0, 0.0]
    sdz = [0.0, 0.0]
    for tag, gx, gy, gz, ax, ay, az in fan:
        dx, dy, dz = cx - gx, cy - gy, cz - gz
        dep2 = dx * dx + dy * dy + dz * dz
        if dep2 < 1e-24:
            continue
        if mode == 0:
            # omega*n = (area*depth/3) * (c - g)/depth: depth cancels.
            area = sqrt(ax * ax + ay * ay + az * az)
            sdx[tag] += area * dx / 3.0
            sdy[tag] += area * dy / 3.0
            sdz[tag] += area * dz / 3.0
        else:
            # omega*n = (area*depth/3) * (-avec/area): area cancels.
            depth = sqrt(dep2)
            sdx[tag] -= ax * depth / 3.0
            sdy[tag] -= ay * depth / 3.0
            sdz[tag] -= az * depth / 3.0

    return (
        v,
        cx + rx,
        cy + ry,
        cz + rz,
        sdx[0] - sdx[1],
        sdy[0] - sdy[1],
        sdz[0] - sdz[1],
    )
