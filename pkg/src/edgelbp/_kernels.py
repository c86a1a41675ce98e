"""Compiled inner loops: sphere/mesh ring extraction, resampling and coding.

Everything here works on plain arrays. ``mesh_arrays`` packs the
connectivity of a :class:`~edgelbp.mesh.SurfaceTessellation`; the public,
object-level API lives in :mod:`edgelbp.rings` and :mod:`edgelbp.lbp`.

Vertex classification during region growing uses a per-call stamp so the
work arrays never need clearing between centers.
"""

import numpy as np
from numba import njit

INSIDE = 1
OUTSIDE = 2

OK = 0
TANGENT = 1
OPEN = 2
MULTI = 3
DEGENERATE = 4

#: relative width of the band around R that counts as tangency
TANGENT_EPS = 1e-9
#: relative radius growth applied when a tangency is detected
TANGENT_BUMP = 1e-7
MAX_RETRIES = 64
#: relative tolerance for ties in the starting point selection
TIE_RTOL = 1e-12


def mesh_arrays(mesh):
    return (
        mesh.vertices,
        mesh.vertex_normals,
        mesh.face_ptr,
        mesh.face_vertices,
        mesh.face_edges,
        mesh.edges,
        mesh.edge_faces,
        mesh.vertex_edge_ptr,
        mesh.vertex_edge_index,
        mesh.vertex_face_ptr,
        mesh.vertex_face_index,
        mesh.boundary_vertices,
    )


@njit(cache=True)
def workspace(n_vertices, n_edges, n_rings, n_samples):
    cap = n_rings * n_edges + 1
    return (
        np.zeros(n_vertices, np.int64),  # 0 vertex stamp
        np.zeros(n_vertices, np.int8),  # 1 vertex state
        np.zeros(n_edges, np.int64),  # 2 edge stamp
        np.zeros(n_edges, np.int64),  # 3 edge -> local point index
        np.empty(n_vertices, np.int64),  # 4 growth stack
        np.empty(n_vertices, np.int64),  # 5 frontier (outside, face-adjacent)
        np.zeros(2, np.int64),  # 6 stamp counters
        np.empty(cap, np.int64),  # 7 point host edge
        np.empty(cap, np.float64),  # 8 point edge parameter
        np.empty((cap, 3), np.float64),  # 9 point position
        np.empty(cap, np.float64),  # 10 point h
        np.empty((cap, 2), np.int64),  # 11 chain links
        np.empty(cap, np.int64),  # 12 ring order (global point ids)
        np.zeros(n_rings + 1, np.int64),  # 13 ring offsets
        np.empty((n_edges + 1, 3), np.float64),  # 14 scratch positions
        np.empty(n_edges + 1, np.float64),  # 15 scratch h
        np.empty(max(n_samples, 1), np.float64),  # 16 samples
        np.empty(n_edges + 1, np.int64),  # 17 scratch ids
    )


@njit(cache=True, inline="always")
def _dist(pos, c, v):
    dx = pos[v, 0] - pos[c, 0]
    dy = pos[v, 1] - pos[c, 1]
    dz = pos[v, 2] - pos[c, 2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True)
def segment_sphere_t(pa, pb, pc, R):
    """Parameter ``t`` in [0, 1] where segment ``pa -> pb`` meets the sphere.

    Assumes exactly one endpoint is strictly inside the sphere.
    """
    d0 = pb[0] - pa[0]
    d1 = pb[1] - pa[1]
    d2 = pb[2] - pa[2]
    a0 = pa[0] - pc[0]
    a1 = pa[1] - pc[1]
    a2 = pa[2] - pc[2]
    A = d0 * d0 + d1 * d1 + d2 * d2
    B = a0 * d0 + a1 * d1 + a2 * d2
    C = a0 * a0 + a1 * a1 + a2 * a2 - R * R
    disc = B * B - A * C
    if disc < 0.0:
        disc = 0.0
    sq = np.sqrt(disc)
    if C < 0.0:  # pa inside: larger root
        if B <= 0.0:
            t = (-B + sq) / A
        else:
            t = -C / (B + sq)
    else:  # pa outside: smaller root
        if B >= 0.0:
            t = (-B - sq) / A
        else:
            t = C / (-B + sq)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return t


@njit(cache=True)
def _classify(pos, c, w, R, eps, vstate, stack, qn, frontier, nf):
    """Returns (tangent, qn, nf)."""
    d = _dist(pos, c, w)
    if abs(d - R) <= eps:
        return True, qn, nf
    if d < R:
        vstate[w] = INSIDE
        stack[qn] = w
        qn += 1
    else:
        vstate[w] = OUTSIDE
        frontier[nf] = w
        nf += 1
    return False, qn, nf


@njit(cache=True)
def grow(c, R, stamp, fresh, seeds, M, W, n_front, stop_at_boundary):
    """Grow the inside region of the sphere (c, R) through shared faces.

    With ``fresh`` the region restarts from ``c`` (and the endpoints of
    ``seeds``); otherwise the outside frontier of the previous, smaller
    radius is reclassified and growth continues from there.

    Returns ``(status, n_front)``.
    """
    pos, _, f_ptr, f_verts, _, e_verts, _, _, _, vf_ptr, vf_idx, boundary = M
    vstamp, vstate, stack, frontier = W[0], W[1], W[4], W[5]
    eps = TANGENT_EPS * R
    qn = 0
    if fresh:
        n_front = 0
        vstamp[c] = stamp
        vstate[c] = INSIDE
        stack[0] = c
        qn = 1
        for i in range(seeds.shape[0]):
            for s in range(2):
                w = e_verts[seeds[i], s]
                if vstamp[w] != stamp:
                    vstamp[w] = stamp
                    tan, qn, n_front = _classify(pos, c, w, R, eps, vstate, stack, qn, frontier, n_front)
                    if tan:
                        return TANGENT, n_front
    else:
        k = 0
        for i in range(n_front):
            w = frontier[i]
            d = _dist(pos, c, w)
            if abs(d - R) <= eps:
                return TANGENT, n_front
            if d < R:
                vstate[w] = INSIDE
                stack[qn] = w
                qn += 1
            else:
                frontier[k] = w
                k += 1
        n_front = k
    status = OK
    while qn > 0:
        qn -= 1
        u = stack[qn]
        if boundary[u]:
            status = OPEN
            if stop_at_boundary:
                return OPEN, n_front
        for fi in range(vf_ptr[u], vf_ptr[u + 1]):
            f = vf_idx[fi]
            for k in range(f_ptr[f], f_ptr[f + 1]):
                w = f_verts[k]
                if vstamp[w] != stamp:
                    vstamp[w] = stamp
                    tan, qn, n_front = _classify(pos, c, w, R, eps, vstate, stack, qn, frontier, n_front)
                    if tan:
                        return TANGENT, n_front
    return status, n_front


@njit(cache=True)
def crossings(c, R, stamp, estamp, h, M, W, n_front, base):
    """Collect one ring point per edge leaving the grown region.

    Points are written at ``base`` onwards; returns their count.
    """
    pos, _, _, _, _, e_verts, _, ve_ptr, ve_idx, _, _, _ = M
    vstamp, vstate, e_stamp, e_point, frontier = W[0], W[1], W[2], W[3], W[5]
    pt_edge, pt_t, pt_pos, pt_h = W[7], W[8], W[9], W[10]
    n = 0
    for i in range(n_front):
        w = frontier[i]
        for k in range(ve_ptr[w], ve_ptr[w + 1]):
            e = ve_idx[k]
            a = e_verts[e, 0]
            b = e_verts[e, 1]
            u = a if b == w else b
            if vstamp[u] == stamp and vstate[u] == INSIDE:
                t = segment_sphere_t(pos[a], pos[b], pos[c], R)
                j = base + n
                pt_edge[j] = e
                pt_t[j] = t
                for d in range(3):
                    pt_pos[j, d] = pos[a, d] + t * (pos[b, d] - pos[a, d])
                pt_h[j] = h[a] + t * (h[b] - h[a])
                e_stamp[e] = estamp
                e_point[e] = n
                n += 1
    return n


@njit(cache=True)
def chain(n, base, stamp, estamp, M, W):
    """Link ring points through shared faces and walk the closed polyline.

    Inside a face, the crossing points bounding each run of outside
    vertices are consecutive. The walk order is written to ``W[12]`` at
    ``base`` (global point ids). Returns a status code.
    """
    _, _, f_ptr, f_verts, f_edges, e_verts, e_faces, _, _, _, _, _ = M
    vstamp, vstate, e_stamp, e_point = W[0], W[1], W[2], W[3]
    pt_edge, nb, order = W[7], W[11], W[12]
    if n == 0:
        return DEGENERATE
    for p in range(n):
        e = pt_edge[base + p]
        a = e_verts[e, 0]
        b = e_verts[e, 1]
        if vstamp[a] == stamp and vstate[a] == INSIDE:
            u, w = a, b
        else:
            u, w = b, a
        for s in range(2):
            f = e_faces[e, s]
            if f < 0:
                return OPEN
            start = f_ptr[f]
            k = f_ptr[f + 1] - start
            iu = 0
            for i in range(k):
                if f_verts[start + i] == u:
                    iu = i
                    break
            step = 1 if f_verts[start + (iu + 1) % k] == w else k - 1
            j = (iu + step) % k
            while True:
                jn = (j + step) % k
                x = f_verts[start + jn]
                if vstamp[x] == stamp and vstate[x] == INSIDE:
                    break
                j = jn
            pe = f_edges[start + j] if step == 1 else f_edges[start + jn]
            if e_stamp[pe] != estamp:
                return OPEN
            nb[base + p, s] = e_point[pe]
    cur = 0
    arrived = e_faces[pt_edge[base], 1]
    count = 0
    while True:
        order[base + count] = base + cur
        count += 1
        e = pt_edge[base + cur]
        s = 0 if e_faces[e, 0] != arrived else 1
        arrived = e_faces[e, s]
        cur = nb[base + cur, s]
        if cur == 0 or count > n:
            break
    if count != n:
        return MULTI
    if n < 3:
        return DEGENERATE
    return OK


@njit(cache=True)
def orient(order, pt_pos, center, normal):
    """Reverse ``order`` in place unless it winds counterclockwise about ``normal``."""
    m = order.shape[0]
    area = 0.0
    for i in range(m):
        p = pt_pos[order[i]]
        q = pt_pos[order[(i + 1) % m]]
        ax, ay, az = p[0] - center[0], p[1] - center[1], p[2] - center[2]
        bx, by, bz = q[0] - center[0], q[1] - center[1], q[2] - center[2]
        area += (ay * bz - az * by) * normal[0] + (az * bx - ax * bz) * normal[1] + (ax * by - ay * bx) * normal[2]
    if area < 0.0:
        for i in range(m // 2):
            tmp = order[i]
            order[i] = order[m - 1 - i]
            order[m - 1 - i] = tmp


@njit(cache=True)
def start_by_max(order, pt_pos, pt_h, pt_edge):
    """Position (in ``order``) of the point maximizing h.

    Near-ties go to the candidate farthest (summed distance) from the
    other ring points, then to the smallest host edge index.
    """
    m = order.shape[0]
    hmax = pt_h[order[0]]
    for i in range(1, m):
        if pt_h[order[i]] > hmax:
            hmax = pt_h[order[i]]
    tol = TIE_RTOL * max(1.0, abs(hmax))
    n_cand = 0
    best = -1
    for i in range(m):
        if pt_h[order[i]] >= hmax - tol:
            n_cand += 1
            best = i
    if n_cand == 1:
        return best
    sums = np.full(m, -1.0)
    smax = -1.0
    for i in range(m):
        if pt_h[order[i]] >= hmax - tol:
            p = pt_pos[order[i]]
            s = 0.0
            for j in range(m):
                q = pt_pos[order[j]]
                s += np.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2)
            sums[i] = s
            if s > smax:
                smax = s
    tol = TIE_RTOL * max(1.0, smax)
    best = -1
    for i in range(m):
        if sums[i] >= 0.0 and sums[i] >= smax - tol:
            if best < 0 or pt_edge[order[i]] < pt_edge[order[best]]:
                best = i
    return best


@njit(cache=True)
def start_by_nearest(order, pt_pos, pt_edge, target):
    """Position (in ``order``) of the point closest to ``target``."""
    m = order.shape[0]
    d = np.empty(m)
    dmin = np.inf
    for i in range(m):
        p = pt_pos[order[i]]
        d[i] = np.sqrt((p[0] - target[0]) ** 2 + (p[1] - target[1]) ** 2 + (p[2] - target[2]) ** 2)
        if d[i] < dmin:
            dmin = d[i]
    tol = TIE_RTOL * max(1.0, dmin)
    best = -1
    for i in range(m):
        if d[i] <= dmin + tol:
            if best < 0 or pt_edge[order[i]] < pt_edge[order[best]]:
                best = i
    return best


@njit(cache=True)
def resample(ring_pos, ring_h, out):
    """Fill ``out`` with h at equidistant arc-length positions.

    ``ring_pos``/``ring_h`` describe the closed polyline starting at the
    first sample. Returns False when the polyline has (near) zero length.
    """
    m = ring_pos.shape[0]
    P = out.shape[0]
    cum = np.empty(m + 1)
    cum[0] = 0.0
    for i in range(m):
        p = ring_pos[i]
        q = ring_pos[(i + 1) % m]
        cum[i + 1] = cum[i] + np.sqrt((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 + (q[2] - p[2]) ** 2)
    L = cum[m]
    if L < 1e-12:
        return False
    i = 0
    for k in range(P):
        s = k * L / P
        while i < m - 1 and cum[i + 1] <= s:
            i += 1
        seg = cum[i + 1] - cum[i]
        a = ring_h[i]
        b = ring_h[(i + 1) % m]
        if seg > 0.0:
            out[k] = a + ((s - cum[i]) / seg) * (b - a)
        else:
            out[k] = a
    return True


@njit(cache=True)
def lbp_code(samples, pivot, alpha2):
    """Binary string ``str(j) = samples[j] >= pivot``, weighted by 1 or 2**(j+1)."""
    code = 0
    for j in range(samples.shape[0]):
        if not (samples[j] < pivot):
            if alpha2:
                code += 1 << (j + 1)
            else:
                code += 1
    return code


@njit(cache=True)
def multi_ring(c, radii, seeded, h, M, W):
    """Extract and orient the rings of ``c`` at the given radii.

    Returns ``(status, ring_index)``; ring ``k`` occupies
    ``W[12][W[13][k]:W[13][k+1]]`` on success.
    """
    normals = M[1]
    pos = M[0]
    ctr, pt_pos, order, ring_off = W[6], W[9], W[12], W[13]
    empty = np.empty(0, np.int64)
    ctr[0] += 1
    stamp = ctr[0]
    n_front = 0
    base = 0
    ring_off[0] = 0
    for k in range(radii.shape[0]):
        R = radii[k]
        fresh = k == 0 or not seeded
        if fresh and k > 0:
            ctr[0] += 1
            stamp = ctr[0]
        status, n_front = grow(c, R, stamp, fresh, empty, M, W, n_front, True)
        if status != OK:
            return status, k
        ctr[1] += 1
        n = crossings(c, R, stamp, ctr[1], h, M, W, n_front, base)
        status = chain(n, base, stamp, ctr[1], M, W)
        if status != OK:
            return status, k
        orient(order[base:base + n], pt_pos, pos[c], normals[c])
        base += n
        ring_off[k + 1] = base
    return OK, radii.shape[0]


@njit(cache=True)
def multi_ring_retry(c, radii, seeded, h, M, W):
    """:func:`multi_ring` with tangency handling; ``radii`` is updated in place."""
    for _ in range(MAX_RETRIES):
        status, k = multi_ring(c, radii, seeded, h, M, W)
        if status != TANGENT:
            return status, k
        radii[k] *= 1.0 + TANGENT_BUMP
    return TANGENT, k


@njit(cache=True)
def ring_starts(n_rings, W):
    """Start positions: argmax-h on the outer ring, nearest point elsewhere."""
    pt_edge, pt_pos, pt_h, order, ring_off = W[7], W[9], W[10], W[12], W[13]
    starts = np.empty(n_rings, np.int64)
    last = n_rings - 1
    outer = order[ring_off[last]:ring_off[last + 1]]
    starts[last] = start_by_max(outer, pt_pos, pt_h, pt_edge)
    ptilde = pt_pos[outer[starts[last]]]
    for k in range(last):
        starts[k] = start_by_nearest(order[ring_off[k]:ring_off[k + 1]], pt_pos, pt_edge, ptilde)
    return starts


@njit(cache=True)
def ring_codes(c, n_rings, starts, pivot, alpha2, W, out):
    """Resample every ring from its start and write one code per ring to ``out``."""
    pt_pos, pt_h, order, ring_off = W[9], W[10], W[12], W[13]
    tmp_pos, tmp_h, samples = W[14], W[15], W[16]
    for k in range(n_rings):
        seg = order[ring_off[k]:ring_off[k + 1]]
        m = seg.shape[0]
        s0 = starts[k]
        for i in range(m):
            g = seg[(s0 + i) % m]
            tmp_pos[i, 0] = pt_pos[g, 0]
            tmp_pos[i, 1] = pt_pos[g, 1]
            tmp_pos[i, 2] = pt_pos[g, 2]
            tmp_h[i] = pt_h[g]
        if not resample(tmp_pos[:m], tmp_h[:m], samples):
            return False
        out[k] = lbp_code(samples, pivot, alpha2)
    return True


@njit(cache=True, nogil=True)
def vertex_codes(centers, radii, n_samples, alpha2, seeded, h, M, out):
    """edgeLBP codes for ``centers``; ``out`` rows stay -1 for non-admissible vertices."""
    n_v = M[0].shape[0]
    n_e = M[5].shape[0]
    n_r = radii.shape[0]
    W = workspace(n_v, n_e, n_r, n_samples)
    row = np.empty(n_r, np.int64)
    r = np.empty(n_r)
    for ci in range(centers.shape[0]):
        c = centers[ci]
        r[:] = radii
        status, _ = multi_ring_retry(c, r, seeded, h, M, W)
        if status != OK:
            continue
        starts = ring_starts(n_r, W)
        if ring_codes(c, n_r, starts, h[c], alpha2, W, row):
            out[ci, :] = row


@njit(cache=True)
def single_ring(c, R, seeds, h, M, W):
    """One ring from scratch, keeping the raw point set even on failure.

    Returns ``(status, n_points)``. Points are ``W[7..10][:n]``; on
    success the closed, oriented walk is ``W[12][:n]``.
    """
    pos, normals = M[0], M[1]
    ctr, pt_pos, order = W[6], W[9], W[12]
    ctr[0] += 1
    stamp = ctr[0]
    status, n_front = grow(c, R, stamp, True, seeds, M, W, 0, False)
    if status == TANGENT:
        return TANGENT, 0
    ctr[1] += 1
    n = crossings(c, R, stamp, ctr[1], h, M, W, n_front, 0)
    if status != OK:
        return status, n
    status = chain(n, 0, stamp, ctr[1], M, W)
    if status == OK:
        orient(order[:n], pt_pos, pos[c], normals[c])
    return status, n
