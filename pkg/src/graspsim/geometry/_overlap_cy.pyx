# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled overlap kernel: fused volume/centroid/direction accumulation.

Mirrors _overlap_py.overlap_quantities operation for operation (same culling,
same clip order, same per-provenance accumulation); keep the two in sync.
"""

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc, realloc


cdef inline double _dmin(double a, double b) noexcept nogil:
    return a if a < b else b


cdef inline double _dmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef inline int _clip_halfspace(double* src, int m, double* dst,
                                double nx, double ny, double nz, double d,
                                double eps) noexcept nogil:
    """Sutherland-Hodgman clip of src (m points) against n.x <= d + eps."""
    cdef int i, j, k = 0
    cdef double ax, ay, az, bx, by, bz, sa, sb, t
    cdef bint a_in, b_in
    for i in range(m):
        ax = src[3 * i]
        ay = src[3 * i + 1]
        az = src[3 * i + 2]
        j = i + 1
        if j == m:
            j = 0
        bx = src[3 * j]
        by = src[3 * j + 1]
        bz = src[3 * j + 2]
        sa = nx * ax + ny * ay + nz * az - d
        sb = nx * bx + ny * by + nz * bz - d
        a_in = sa <= eps
        b_in = sb <= eps
        if a_in:
            dst[3 * k] = ax
            dst[3 * k + 1] = ay
            dst[3 * k + 2] = az
            k += 1
        if a_in != b_in:
            # Clamp the crossing to the segment: with the slackened inside
            # test the denominator can be arbitrarily small when an edge
            # grazes the plane, and an unclamped t throws the point far off.
            t = sa / (sa - sb)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            dst[3 * k] = ax + t * (bx - ax)
            dst[3 * k + 1] = ay + t * (by - ay)
            dst[3 * k + 2] = az + t * (bz - az)
            k += 1
    return k


cdef struct Accum:
    # Per-provenance partial sums plus the fan-triangle store for the
    # direction pass: 7 doubles per entry (tag, g, area vector).
    double vol6[2]
    double momx[2]
    double momy[2]
    double momz[2]
    double* fan
    int fan_len
    int fan_cap


cdef int _side_fragments(double[:, ::1] verts, int[:, ::1] tris,
                         double[:, ::1] clip_n, double[::1] clip_d,
                         double[:, ::1] cop_n, double[::1] cop_d, bint drop_cop,
                         double* ovlo, double* ovhi, double eps,
                         double rx, double ry, double rz,
                         int tag, Accum* acc) except -1:
    """Clip one mesh's faces against the other's half-spaces, accumulating
    fan-triangle contributions relative to the reference point r."""
    cdef double margin = 2.0 * eps
    cdef double ox0 = ovlo[0] - margin, oy0 = ovlo[1] - margin, oz0 = ovlo[2] - margin
    cdef double ox1 = ovhi[0] + margin, oy1 = ovhi[1] + margin, oz1 = ovhi[2] + margin
    cdef int nf = tris.shape[0]
    cdef int np_ = clip_n.shape[0]
    cdef int f, k, i, i0, i1, i2, m, kept_count = 0, act_count = 0
    cdef double fx0, fx1, fy0, fy1, fz0, fz1
    cdef double kx0 = 1e300, ky0 = 1e300, kz0 = 1e300
    cdef double kx1 = -1e300, ky1 = -1e300, kz1 = -1e300
    cdef double nx, ny, nz, d, reach
    cdef double ux, uy, uz, vx, vy, vz, fnx, fny, fnz
    cdef double x0, y0, z0, x1, y1, z1, x2, y2, z2, cxp, cyp, czp, det
    cdef bint cop
    cdef int* kept = <int*> malloc(nf * sizeof(int))
    cdef int* active = <int*> malloc(np_ * sizeof(int))
    cdef int cap = 3 + np_ + 1
    cdef double* polya = <double*> malloc(3 * cap * sizeof(double))
    cdef double* polyb = <double*> malloc(3 * cap * sizeof(double))
    cdef double* cur
    cdef double* nxt
    cdef double* tmp
    cdef double* entry
    if kept == NULL or active == NULL or polya == NULL or polyb == NULL:
        free(kept); free(active); free(polya); free(polyb)
        raise MemoryError()

    try:
        for f in range(nf):
            i0 = tris[f, 0]
            i1 = tris[f, 1]
            i2 = tris[f, 2]
            fx0 = _dmin(verts[i0, 0], _dmin(verts[i1, 0], verts[i2, 0]))
            fx1 = _dmax(verts[i0, 0], _dmax(verts[i1, 0], verts[i2, 0]))
            if fx0 > ox1 or fx1 < ox0:
                continue
            fy0 = _dmin(verts[i0, 1], _dmin(verts[i1, 1], verts[i2, 1]))
            fy1 = _dmax(verts[i0, 1], _dmax(verts[i1, 1], verts[i2, 1]))
            if fy0 > oy1 or fy1 < oy0:
                continue
            fz0 = _dmin(verts[i0, 2], _dmin(verts[i1, 2], verts[i2, 2]))
            fz1 = _dmax(verts[i0, 2], _dmax(verts[i1, 2], verts[i2, 2]))
            if fz0 > oz1 or fz1 < oz0:
                continue
            kept[kept_count] = f
            kept_count += 1
            kx0 = _dmin(kx0, fx0)
            ky0 = _dmin(ky0, fy0)
            kz0 = _dmin(kz0, fz0)
            kx1 = _dmax(kx1, fx1)
            ky1 = _dmax(ky1, fy1)
            kz1 = _dmax(kz1, fz1)
        if kept_count == 0:
            return 0

        for k in range(np_):
            nx = clip_n[k, 0]
            ny = clip_n[k, 1]
            nz = clip_n[k, 2]
            reach = (
                (nx * kx1 if nx > 0.0 else nx * kx0)
                + (ny * ky1 if ny > 0.0 else ny * ky0)
                + (nz * kz1 if nz > 0.0 else nz * kz0)
            )
            if reach - clip_d[k] > eps:
                active[act_count] = k
                act_count += 1

        for f in range(kept_count):
            i0 = tris[kept[f], 0]
            i1 = tris[kept[f], 1]
            i2 = tris[kept[f], 2]
            if drop_cop:
                ux = verts[i1, 0] - verts[i0, 0]
                uy = verts[i1, 1] - verts[i0, 1]
                uz = verts[i1, 2] - verts[i0, 2]
                vx = verts[i2, 0] - verts[i0, 0]
                vy = verts[i2, 1] - verts[i0, 1]
                vz = verts[i2, 2] - verts[i0, 2]
                fnx = uy * vz - uz * vy
                fny = uz * vx - ux * vz
                fnz = ux * vy - uy * vx
                cop = False
                for k in range(cop_n.shape[0]):
                    nx = cop_n[k, 0]
                    ny = cop_n[k, 1]
                    nz = cop_n[k, 2]
                    d = cop_d[k]
                    if nx * fnx + ny * fny + nz * fnz <= 0.0:
                        continue
                    if (
                        fabs(nx * verts[i0, 0] + ny * verts[i0, 1] + nz * verts[i0, 2] - d) <= eps
                        and fabs(nx * verts[i1, 0] + ny * verts[i1, 1] + nz * verts[i1, 2] - d) <= eps
                        and fabs(nx * verts[i2, 0] + ny * verts[i2, 1] + nz * verts[i2, 2] - d) <= eps
                    ):
                        cop = True
                        break
                if cop:
                    continue
            cur = polya
            nxt = polyb
            cur[0] = verts[i0, 0]
            cur[1] = verts[i0, 1]
            cur[2] = verts[i0, 2]
            cur[3] = verts[i1, 0]
            cur[4] = verts[i1, 1]
            cur[5] = verts[i1, 2]
            cur[6] = verts[i2, 0]
            cur[7] = verts[i2, 1]
            cur[8] = verts[i2, 2]
            m = 3
            for k in range(act_count):
                i = active[k]
                m = _clip_halfspace(cur, m, nxt,
                                    clip_n[i, 0], clip_n[i, 1], clip_n[i, 2],
                                    clip_d[i], eps)
                tmp = cur
                cur = nxt
                nxt = tmp
                if m < 3:
                    break
            if m < 3:
                continue
            # Fan the surviving polygon and accumulate, reference-relative.
            x0 = cur[0] - rx
            y0 = cur[1] - ry
            z0 = cur[2] - rz
            for i in range(1, m - 1):
                x1 = cur[3 * i] - rx
                y1 = cur[3 * i + 1] - ry
                z1 = cur[3 * i + 2] - rz
                x2 = cur[3 * i + 3] - rx
                y2 = cur[3 * i + 4] - ry
                z2 = cur[3 * i + 5] - rz
                cxp = y0 * z1 - z0 * y1
                cyp = z0 * x1 - x0 * z1
                czp = x0 * y1 - y0 * x1
                det = cxp * x2 + cyp * y2 + czp * z2
                acc.vol6[tag] += det
                acc.momx[tag] += det * (x0 + x1 + x2)
                acc.momy[tag] += det * (y0 + y1 + y2)
                acc.momz[tag] += det * (z0 + z1 + z2)
                if acc.fan_len == acc.fan_cap:
                    acc.fan_cap *= 2
                    tmp = <double*> realloc(acc.fan, 7 * acc.fan_cap * sizeof(double))
                    if tmp == NULL:
                        raise MemoryError()
                    acc.fan = tmp
                entry = acc.fan + 7 * acc.fan_len
                entry[0] = tag
                entry[1] = (x0 + x1 + x2) / 3.0
                entry[2] = (y0 + y1 + y2) / 3.0
                entry[3] = (z0 + z1 + z2) / 3.0
                ux = x1 - x0
                uy = y1 - y0
                uz = z1 - z0
                vx = x2 - x0
                vy = y2 - y0
                vz = z2 - z0
                entry[4] = 0.5 * (uy * vz - uz * vy)
                entry[5] = 0.5 * (uz * vx - ux * vz)
                entry[6] = 0.5 * (ux * vy - uy * vx)
                acc.fan_len += 1
    finally:
        free(kept)
        free(active)
        free(polya)
        free(polyb)
    return 0


def overlap_quantities(double[:, ::1] va, int[:, ::1] ta,
                       double[:, ::1] pna, double[::1] pda,
                       double[:, ::1] vb, int[:, ::1] tb,
                       double[:, ::1] pnb, double[::1] pdb,
                       double eps, double min_volume, int mode):
    """Compiled twin of _overlap_py.overlap_quantities (same contract)."""
    cdef int i, na = va.shape[0], nb = vb.shape[0], tag
    cdef double margin = 2.0 * eps
    cdef double alo[3]
    cdef double ahi[3]
    cdef double blo[3]
    cdef double bhi[3]
    cdef double ovlo[3]
    cdef double ovhi[3]
    cdef double rx, ry, rz, vol6_sum, v, cx, cy, cz
    cdef double gx, gy, gz, ax, ay, az, dx, dy, dz, dep2, area, depth
    cdef double sdx[2]
    cdef double sdy[2]
    cdef double sdz[2]
    cdef double* entry
    cdef Accum acc

    if na == 0 or nb == 0:
        return None
    for i in range(3):
        alo[i] = ahi[i] = va[0, i]
        blo[i] = bhi[i] = vb[0, i]
    for i in range(1, na):
        alo[0] = _dmin(alo[0], va[i, 0]); ahi[0] = _dmax(ahi[0], va[i, 0])
        alo[1] = _dmin(alo[1], va[i, 1]); ahi[1] = _dmax(ahi[1], va[i, 1])
        alo[2] = _dmin(alo[2], va[i, 2]); ahi[2] = _dmax(ahi[2], va[i, 2])
    for i in range(1, nb):
        blo[0] = _dmin(blo[0], vb[i, 0]); bhi[0] = _dmax(bhi[0], vb[i, 0])
        blo[1] = _dmin(blo[1], vb[i, 1]); bhi[1] = _dmax(bhi[1], vb[i, 1])
        blo[2] = _dmin(blo[2], vb[i, 2]); bhi[2] = _dmax(bhi[2], vb[i, 2])
    for i in range(3):
        ovlo[i] = _dmax(alo[i], blo[i])
        ovhi[i] = _dmin(ahi[i], bhi[i])
        if ovlo[i] - margin > ovhi[i] + margin:
            return None
    rx = 0.5 * (ovlo[0] + ovhi[0])
    ry = 0.5 * (ovlo[1] + ovhi[1])
    rz = 0.5 * (ovlo[2] + ovhi[2])

    acc.vol6[0] = acc.vol6[1] = 0.0
    acc.momx[0] = acc.momx[1] = 0.0
    acc.momy[0] = acc.momy[1] = 0.0
    acc.momz[0] = acc.momz[1] = 0.0
    acc.fan_len = 0
    acc.fan_cap = 256
    acc.fan = <double*> malloc(7 * acc.fan_cap * sizeof(double))
    if acc.fan == NULL:
        raise MemoryError()
    try:
        _side_fragments(va, ta, pnb, pdb, pna, pda, False,
                        ovlo, ovhi, eps, rx, ry, rz, 0, &acc)
        _side_fragments(vb, tb, pna, pda, pna, pda, True,
                        ovlo, ovhi, eps, rx, ry, rz, 1, &acc)
        if acc.fan_len == 0:
            return None
        vol6_sum = acc.vol6[0] + acc.vol6[1]
        v = vol6_sum / 6.0
        if v <= min_volume:
            return None
        cx = (acc.momx[0] + acc.momx[1]) / (4.0 * vol6_sum)
        cy = (acc.momy[0] + acc.momy[1]) / (4.0 * vol6_sum)
        cz = (acc.momz[0] + acc.momz[1]) / (4.0 * vol6_sum)

        sdx[0] = sdx[1] = 0.0
        sdy[0] = sdy[1] = 0.0
        sdz[0] = sdz[1] = 0.0
        for i in range(acc.fan_len):
            entry = acc.fan + 7 * i
            tag = <int> entry[0]
            gx = entry[1]
            gy = entry[2]
            gz = entry[3]
            ax = entry[4]
            ay = entry[5]
            az = entry[6]
            dx = cx - gx
            dy = cy - gy
            dz = cz - gz
            dep2 = dx * dx + dy * dy + dz * dz
            if dep2 < 1e-24:
                continue
            if mode == 0:
                area = sqrt(ax * ax + ay * ay + az * az)
                sdx[tag] += area * dx / 3.0
                sdy[tag] += area * dy / 3.0
                sdz[tag] += area * dz / 3.0
            else:
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
    finally:
        free(acc.fan)
