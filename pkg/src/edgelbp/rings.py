"""Sphere/mesh intersection rings around a vertex.

A ring is the closed polyline where the sphere of radius ``R`` centered at
a vertex cuts the mesh edges. The region inside the sphere is grown from
the center through shared faces; every edge leaving that region carries
one ring point, and points are chained through the faces they share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import (
    DegenerateRingError,
    MultiComponentBoundaryError,
    OpenRingError,
    TangentEdgeError,
)
from .mesh import VertexField

__all__ = [
    "RingPoint",
    "Ring",
    "MultiRing",
    "edge_sphere_intersection",
    "sphere_crossings",
    "ring_extraction",
    "sort_ring",
    "multi_ring",
    "ring_radii",
    "export_rings_obj",
]

_STATUS_ERRORS = {
    K.OPEN: (OpenRingError, "ring reaches the mesh boundary"),
    K.MULTI: (MultiComponentBoundaryError, "grown region has more than one boundary curve"),
    K.DEGENERATE: (DegenerateRingError, "ring has fewer than 3 points"),
    K.TANGENT: (TangentEdgeError, "sphere is tangent to a vertex"),
}
_STATUS_NAMES = {K.OK: "ok", K.OPEN: "open", K.MULTI: "multi-component", K.DEGENERATE: "degenerate",
                 K.TANGENT: "tangent"}


@dataclass(frozen=True)
class RingPoint:
    position: np.ndarray
    host_edge: int
    edge_parameter: float
    h_value: float


@dataclass(frozen=True)
class Ring:
    """Closed, counterclockwise polyline; ``points[start_index]`` is the starting point."""

    center: int
    radius: float
    points: tuple = field(repr=False)
    closed: bool = True
    start_index: int = 0

    def __len__(self):
        return len(self.points)

    @property
    def positions(self):
        return np.array([p.position for p in self.points]).reshape(-1, 3)

    @property
    def h_values(self):
        return np.array([p.h_value for p in self.points])

    @property
    def host_edges(self):
        return np.array([p.host_edge for p in self.points], dtype=np.int64)

    def rolled(self):
        """Points reordered so the starting point comes first."""
        return self.points[self.start_index:] + self.points[:self.start_index]


@dataclass(frozen=True)
class MultiRing:
    """Concentric rings of one vertex.

    When ``admissible`` is False, ``rings`` is empty and ``reason`` names
    the failure of ring number ``failed_ring``.
    """

    center: int
    radii: np.ndarray = field(repr=False)
    rings: tuple = field(repr=False)
    admissible: bool
    reason: str = "ok"
    failed_ring: int = -1


def _h_array(h, mesh):
    if h is None:
        return np.zeros(mesh.n_vertices)
    if isinstance(h, VertexField):
        h.check_mesh(mesh)
        return h.values
    arr = np.ascontiguousarray(h, dtype=np.float64)
    if arr.shape != (mesh.n_vertices,):
        raise ValueError(f"h has shape {arr.shape}, expected ({mesh.n_vertices},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError("h contains non-finite values")
    return arr


def _check_center(mesh, center):
    c = int(center)
    if not 0 <= c < mesh.n_vertices:
        raise IndexError(f"vertex {center} out of range [0, {mesh.n_vertices})")
    return c


def _check_radius(R):
    R = float(R)
    if not (np.isfinite(R) and R > 0):
        raise ValueError(f"radius must be positive, got {R}")
    return R


def ring_radii(r_max, n_rings):
    """Uniformly spaced radii ``k * r_max / n_rings`` for ``k = 1..n_rings``."""
    r_max = _check_radius(r_max)
    n_rings = int(n_rings)
    if n_rings < 1:
        raise ValueError("n_rings must be >= 1")
    return np.arange(1, n_rings + 1) * (r_max / n_rings)


def edge_sphere_intersection(mesh, edge, center, R, h=None):
    """Crossing of edge ``edge`` with the sphere ``(center, R)``.

    Returns
    -------
    RingPoint or None
        None when both endpoints lie on the same side of the sphere.

    Raises
    ------
    TangentEdgeError
        If an endpoint lies within ``1e-9 * R`` of the sphere.
    """
    c = _check_center(mesh, center)
    R = _check_radius(R)
    hv = _h_array(h, mesh)
    a, b = (int(x) for x in mesh.edges[edge])
    V = mesh.vertices
    da = np.linalg.norm(V[a] - V[c])
    db = np.linalg.norm(V[b] - V[c])
    eps = K.TANGENT_EPS * R
    if abs(da - R) <= eps or abs(db - R) <= eps:
        raise TangentEdgeError(f"edge {edge} has an endpoint on the sphere")
    if (da < R) == (db < R):
        return None
    t = K.segment_sphere_t(V[a], V[b], V[c], R)
    pos = V[a] + t * (V[b] - V[a])
    return RingPoint(pos, int(edge), float(t), float(hv[a] + t * (hv[b] - hv[a])))


def _points(W, ids):
    pt_edge, pt_t, pt_pos, pt_h = W[7], W[8], W[9], W[10]
    return tuple(
        RingPoint(pt_pos[i].copy(), int(pt_edge[i]), float(pt_t[i]), float(pt_h[i])) for i in ids
    )


def _single(mesh, c, R, hv, seeds):
    W = K.workspace(mesh.n_vertices, mesh.n_edges, 1, 1)
    M = K.mesh_arrays(mesh)
    for _ in range(K.MAX_RETRIES):
        status, n = K.single_ring(c, R, seeds, hv, M, W)
        if status != K.TANGENT:
            return status, n, R, W
        R *= 1.0 + K.TANGENT_BUMP
    raise TangentEdgeError(f"vertex {c}: tangency persists after {K.MAX_RETRIES} radius perturbations")


def _seed_array(mesh, seed_edges):
    if seed_edges is None:
        return np.empty(0, np.int64)
    seeds = np.unique(np.asarray(list(seed_edges), dtype=np.int64))
    if seeds.size and (seeds[0] < 0 or seeds[-1] >= mesh.n_edges):
        raise IndexError("seed edge out of range")
    return seeds


def sphere_crossings(mesh, center, R, h=None):
    """Unordered ring points of the region grown from ``center``, open or not.

    Returns
    -------
    points : tuple of RingPoint
    radius : float
        Radius actually used (perturbed away from tangencies).
    """
    c = _check_center(mesh, center)
    status, n, R, W = _single(mesh, c, _check_radius(R), _h_array(h, mesh), _seed_array(mesh, None))
    return _points(W, range(n)), R


def ring_extraction(mesh, center, R, h=None, seed_edges=None):
    """Extract the sorted ring of ``center`` at radius ``R``.

    Parameters
    ----------
    mesh : SurfaceTessellation
    center : int
    R : float
        Sphere radius in mesh units. It is nudged outward by a relative
        1e-7 whenever a vertex lies on the sphere; ``Ring.radius`` holds the
        value used.
    h : VertexField or array_like, optional
        Field interpolated at the ring points (zeros if omitted).
    seed_edges : iterable of int, optional
        Crossing edges of a smaller ring around the same center. Their
        endpoints join the center as growth seeds.

    Raises
    ------
    OpenRingError, MultiComponentBoundaryError, DegenerateRingError
    """
    c = _check_center(mesh, center)
    hv = _h_array(h, mesh)
    status, n, R, W = _single(mesh, c, _check_radius(R), hv, _seed_array(mesh, seed_edges))
    if status != K.OK:
        cls, msg = _STATUS_ERRORS[status]
        raise cls(f"vertex {c}, R={R:g}: {msg}")
    order = W[12][:n]
    start = K.start_by_max(order, W[9], W[10], W[7])
    return Ring(c, R, _points(W, order), True, int(start))


def sort_ring(ring, mesh, center=None, h=None):
    """Order ring points counterclockwise about the center normal, starting at max h.

    ``h`` is accepted for signature symmetry; the stored ``h_value`` of
    each point is what drives the starting point choice.
    """
    c = ring.center if center is None else _check_center(mesh, center)
    if len(ring.points) < 3:
        raise DegenerateRingError("ring has fewer than 3 points")
    pos = ring.positions
    hv = ring.h_values
    edges = ring.host_edges
    V = mesh.vertices
    ctr = V[c]
    nrm = mesh.vertex_normals[c]
    # angular order in the tangent plane, then winding/starting point
    u = np.cross(nrm, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-6:
        u = np.cross(nrm, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(nrm, u)
    d = pos - ctr
    ang = np.arctan2(d @ w, d @ u)
    order = np.lexsort((edges, ang)).astype(np.int64)
    K.orient(order, pos, ctr, nrm)
    start = K.start_by_max(order, pos, hv, edges)
    pts = tuple(ring.points[i] for i in order)
    return Ring(c, ring.radius, pts, ring.closed, int(start))


def multi_ring(mesh, center, r_max, n_rings, h=None, *, seeded=True):
    """Concentric rings at radii ``k * r_max / n_rings``.

    Only the outer ring starts at its max-h point; inner rings start at
    their point nearest to it. Extraction failures never raise: they make
    the result non-admissible.

    Parameters
    ----------
    seeded : bool, default=True
        Grow each ring from the previous ring's frontier instead of from
        scratch. Both give the same rings.
    """
    c = _check_center(mesh, center)
    hv = _h_array(h, mesh)
    radii = ring_radii(r_max, n_rings)
    W = K.workspace(mesh.n_vertices, mesh.n_edges, radii.size, 1)
    r = radii.copy()
    status, k = K.multi_ring_retry(c, r, bool(seeded), hv, K.mesh_arrays(mesh), W)
    if status != K.OK:
        return MultiRing(c, r, (), False, _STATUS_NAMES[status], int(k))
    starts = K.ring_starts(r.size, W)
    order, off = W[12], W[13]
    rings = tuple(
        Ring(c, float(r[i]), _points(W, order[off[i]:off[i + 1]]), True, int(starts[i]))
        for i in range(r.size)
    )
    return MultiRing(c, r, rings, True)


def export_rings_obj(multirings, path):
    """Write ring polylines as OBJ line sets, one object per radius index."""
    if isinstance(multirings, MultiRing):
        multirings = [multirings]
    lines = []
    n_written = 0
    by_level = {}
    for mr in multirings:
        for k, ring in enumerate(mr.rings):
            by_level.setdefault(k, []).append(ring)
    for k in sorted(by_level):
        lines.append(f"o ring_{k + 1}")
        for ring in by_level[k]:
            first = n_written + 1
            for p in ring.rolled():
                x, y, z = p.position.tolist()
                lines.append(f"v {x!r} {y!r} {z!r}")
            n_written += len(ring)
            idx = " ".join(str(i) for i in range(first, n_written + 1))
            lines.append(f"l {idx} {first}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
