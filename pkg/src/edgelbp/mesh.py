"""Indexed polygon surface tessellations and per-vertex scalar fields."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateNormalError,
    EmptyMeshError,
    NonConvexFaceError,
    NonManifoldError,
    NonPlanarFaceError,
    ParseError,
)

__all__ = [
    "SurfaceTessellation",
    "VertexField",
    "vertex_edges",
    "surface_area",
    "mean_edge_length",
    "vertex_normal",
    "boundary_distance_filter",
]

#: relative tolerance (times bounding-box diagonal) for face planarity/convexity
DEFAULT_FACE_TOLERANCE = 1e-6


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _csr_from_pairs(rows, cols, n):
    """Group ``cols`` by ``rows`` (already sorted by row) into CSR arrays."""
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=ptr[1:])
    return ptr, np.ascontiguousarray(cols, dtype=np.int64)


class SurfaceTessellation:
    """Immutable polygon mesh with precomputed adjacency.

    Parameters
    ----------
    vertices : array_like, shape (n_vertices, 3)
        Vertex positions in millimeters.
    faces : sequence of sequences of int, or array_like of shape (n_faces, k)
        Vertex-index cycles. Faces must have at least three distinct
        vertices and be convex, planar polygons.
    face_tolerance : float
        Planarity/convexity tolerance relative to the bounding-box diagonal.
    validate : bool
        Run the planarity/convexity checks on non-triangular faces.

    Attributes
    ----------
    vertices : ndarray of shape (n_vertices, 3)
    edges : ndarray of shape (n_edges, 2)
        Unordered vertex pairs stored as ``(lo, hi)``, sorted
        lexicographically.
    edge_faces : ndarray of shape (n_edges, 2)
        Incident faces of every edge, padded with ``-1`` on boundary edges.
    boundary_vertices : ndarray of bool, shape (n_vertices,)

    Notes
    -----
    Faces are stored in CSR form (``face_ptr``/``face_vertices``) together
    with ``face_edges``, the edge joining ``face_vertices[k]`` and the next
    vertex of the same cycle. Instances are never mutated after
    construction, so they can be shared freely between threads.
    """

    def __init__(self, vertices, faces, *, face_tolerance=DEFAULT_FACE_TOLERANCE, validate=True):
        verts = np.asarray(vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[0] == 0:
            raise EmptyMeshError("mesh has no vertices")
        if verts.shape[1] != 3:
            raise ParseError(f"vertices must be 3D, got shape {verts.shape}")
        if not np.all(np.isfinite(verts)):
            raise ParseError("vertex coordinates must be finite")
        n_v = verts.shape[0]

        if isinstance(faces, np.ndarray) and faces.ndim == 2:
            sizes = np.full(faces.shape[0], faces.shape[1], dtype=np.int64)
            flat = faces.astype(np.int64).ravel()
        else:
            faces = [tuple(f) for f in faces]
            sizes = np.fromiter((len(f) for f in faces), dtype=np.int64, count=len(faces))
            flat = np.fromiter((i for f in faces for i in f), dtype=np.int64, count=int(sizes.sum()))
        n_f = sizes.shape[0]
        if n_f == 0:
            raise EmptyMeshError("mesh has no faces")
        if np.any(sizes < 3):
            raise ParseError("faces need at least 3 vertices")
        if flat.min() < 0 or flat.max() >= n_v:
            raise ParseError("face references a vertex index out of range")

        face_ptr = np.zeros(n_f + 1, dtype=np.int64)
        np.cumsum(sizes, out=face_ptr[1:])
        face_id = np.repeat(np.arange(n_f, dtype=np.int64), sizes)

        order = np.lexsort((flat, face_id))
        dup = (face_id[order][1:] == face_id[order][:-1]) & (flat[order][1:] == flat[order][:-1])
        if np.any(dup):
            bad = int(face_id[order][1:][dup][0])
            raise ParseError(f"face {bad} repeats a vertex")

        nxt = np.arange(flat.shape[0], dtype=np.int64) + 1
        nxt[face_ptr[1:] - 1] = face_ptr[:-1]
        a, b = flat, flat[nxt]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys, face_edges = np.unique(lo * n_v + hi, return_inverse=True)
        face_edges = face_edges.astype(np.int64).ravel()
        edges = np.stack([keys // n_v, keys % n_v], axis=1).astype(np.int64)
        n_e = edges.shape[0]

        counts = np.bincount(face_edges, minlength=n_e)
        if np.any(counts > 2):
            e = int(np.argmax(counts > 2))
            raise NonManifoldError(
                f"edge ({edges[e, 0]}, {edges[e, 1]}) is shared by {counts[e]} faces"
            )
        by_edge = np.lexsort((face_id, face_edges))
        starts = np.zeros(n_e, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        edge_faces = np.full((n_e, 2), -1, dtype=np.int64)
        edge_faces[:, 0] = face_id[by_edge[starts]]
        two = counts == 2
        edge_faces[two, 1] = face_id[by_edge[starts[two] + 1]]

        # vertex -> edges, sorted by the opposite vertex
        ve_v = np.concatenate([edges[:, 0], edges[:, 1]])
        ve_o = np.concatenate([edges[:, 1], edges[:, 0]])
        ve_e = np.concatenate([np.arange(n_e), np.arange(n_e)])
        o = np.lexsort((ve_o, ve_v))
        ve_ptr, ve_idx = _csr_from_pairs(ve_v[o], ve_e[o], n_v)

        o = np.lexsort((face_id, flat))
        vf_ptr, vf_idx = _csr_from_pairs(flat[o], face_id[o], n_v)

        boundary_edges = counts == 1
        boundary_vertices = np.zeros(n_v, dtype=bool)
        boundary_vertices[edges[boundary_edges].ravel()] = True

        self.vertices = _readonly(verts)
        self.face_ptr = _readonly(face_ptr)
        self.face_vertices = _readonly(flat)
        self.face_edges = _readonly(face_edges)
        self.edges = _readonly(edges)
        self.edge_faces = _readonly(edge_faces)
        self.vertex_edge_ptr = _readonly(ve_ptr)
        self.vertex_edge_index = _readonly(ve_idx)
        self.vertex_face_ptr = _readonly(vf_ptr)
        self.vertex_face_index = _readonly(vf_idx)
        self.boundary_edges = _readonly(boundary_edges)
        self.boundary_vertices = _readonly(boundary_vertices)
        self.face_tolerance = float(face_tolerance)

        if validate and np.any(sizes > 3):
            self._check_polygons(sizes)

    # -- construction helpers -------------------------------------------------

    def _check_polygons(self, sizes):
        tol = self.face_tolerance * max(self.bounding_box_diagonal, 1e-300)
        for k in np.unique(sizes[sizes > 3]):
            fids = np.flatnonzero(sizes == k)
            idx = self.face_ptr[fids][:, None] + np.arange(k)
            P = self.vertices[self.face_vertices[idx]]  # (m, k, 3)
            nrm = _newell(P)
            length = np.linalg.norm(nrm, axis=1)
            ok = length > 0
            unit = np.zeros_like(nrm)
            unit[ok] = nrm[ok] / length[ok, None]
            centroid = P.mean(axis=1)
            offset = np.abs(np.einsum("mkd,md->mk", P - centroid[:, None, :], unit))
            bad = np.flatnonzero(offset.max(axis=1) > tol)
            if bad.size:
                raise NonPlanarFaceError(f"face {int(fids[bad[0]])} is not planar")
            e_in = P - np.roll(P, 1, axis=1)
            e_out = np.roll(P, -1, axis=1) - P
            turn = np.einsum("mkd,md->mk", np.cross(e_in, e_out), unit)
            scale = np.linalg.norm(e_in, axis=2) * np.linalg.norm(e_out, axis=2)
            bad = np.flatnonzero(np.any(turn < -self.face_tolerance * scale, axis=1))
            if bad.size:
                raise NonConvexFaceError(f"face {int(fids[bad[0]])} is not convex")

    def with_vertices(self, vertices):
        """Return a mesh with the same connectivity and new positions."""
        new = object.__new__(type(self))
        new.__dict__.update(
            {k: v for k, v in self.__dict__.items() if not isinstance(getattr(type(self), k, None), cached_property)}
        )
        verts = np.asarray(vertices, dtype=np.float64)
        if verts.shape != self.vertices.shape:
            raise ValueError("vertex array shape mismatch")
        new.vertices = _readonly(verts.copy())
        return new

    def transformed(self, rotation=None, translation=None, scale=1.0):
        """Apply ``x -> scale * rotation @ x + translation`` to every vertex."""
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=np.float64).T
        v = v * scale
        if translation is not None:
            v = v + np.asarray(translation, dtype=np.float64)
        return self.with_vertices(v)

    # -- basic queries ---------------------------------------------------------

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.face_ptr.shape[0] - 1

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def face_sizes(self):
        return np.diff(self.face_ptr)

    @cached_property
    def faces(self):
        """Faces as a tuple of vertex-index tuples."""
        flat = self.face_vertices.tolist()
        ptr = self.face_ptr.tolist()
        return tuple(tuple(flat[ptr[i]:ptr[i + 1]]) for i in range(self.n_faces))

    def face(self, f):
        return self.face_vertices[self.face_ptr[f]:self.face_ptr[f + 1]]

    @property
    def is_triangular(self):
        return bool(np.all(self.face_sizes == 3))

    @property
    def is_closed(self):
        return not bool(self.boundary_edges.any())

    def _check_vertex(self, v):
        if not (0 <= v < self.n_vertices):
            raise IndexError(f"vertex index {v} out of range [0, {self.n_vertices})")

    def vertex_edges(self, v):
        """Edges incident to ``v`` ordered by opposite-vertex index."""
        v = int(v)
        self._check_vertex(v)
        return self.vertex_edge_index[self.vertex_edge_ptr[v]:self.vertex_edge_ptr[v + 1]].copy()

    def vertex_faces(self, v):
        v = int(v)
        self._check_vertex(v)
        return self.vertex_face_index[self.vertex_face_ptr[v]:self.vertex_face_ptr[v + 1]].copy()

    def vertex_neighbors(self, v):
        e = self.edges[self.vertex_edges(v)]
        return np.where(e[:, 0] == v, e[:, 1], e[:, 0])

    @cached_property
    def bounding_box_diagonal(self):
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    @cached_property
    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return _readonly(np.sqrt(np.einsum("ij,ij->i", d, d)))

    # -- triangulation and face geometry --------------------------------------

    @cached_property
    def fan_triangles(self):
        """Fan triangulation from each face's first vertex.

        Returns
        -------
        triangles : ndarray of shape (n_triangles, 3)
        parent : ndarray of shape (n_triangles,)
            Index of the polygon each triangle came from.
        """
        sizes = self.face_sizes
        n_tri = sizes - 2
        parent = np.repeat(np.arange(self.n_faces, dtype=np.int64), n_tri)
        first = np.repeat(self.face_ptr[:-1], n_tri)
        # local index of the triangle inside its fan: 0 .. k-3
        local = np.arange(parent.shape[0]) - np.repeat(np.cumsum(n_tri) - n_tri, n_tri)
        tris = np.stack(
            [
                self.face_vertices[first],
                self.face_vertices[first + local + 1],
                self.face_vertices[first + local + 2],
            ],
            axis=1,
        )
        tris.setflags(write=False)
        parent.setflags(write=False)
        return tris, parent

    @cached_property
    def face_areas(self):
        tris, parent = self.fan_triangles
        p = self.vertices[tris]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        tri_area = 0.5 * np.sqrt(np.einsum("ij,ij->i", cr, cr))
        return _readonly(np.bincount(parent, weights=tri_area, minlength=self.n_faces))

    @cached_property
    def face_area_vectors(self):
        """Area-weighted face normals (Newell vector / 2), oriented by winding."""
        tris, parent = self.fan_triangles
        p = self.vertices[tris]
        cr = 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        out = np.zeros((self.n_faces, 3))
        np.add.at(out, parent, cr)
        return _readonly(out)

    def surface_area(self):
        return float(self.face_areas.sum())

    def mean_edge_length(self):
        if self.n_edges == 0:
            raise EmptyMeshError("mesh has no edges")
        return float(self.edge_lengths.mean())

    def vertex_normal(self, v):
        v = int(v)
        self._check_vertex(v)
        s = self.face_area_vectors[self.vertex_faces(v)].sum(axis=0)
        n = np.linalg.norm(s)
        if n < 1e-12:
            raise DegenerateNormalError(f"vertex {v} has a degenerate normal")
        return s / n

    @cached_property
    def vertex_normals(self):
        """Unit area-weighted normals of all vertices.

        Vertices whose weighted normal sum vanishes get a zero vector; use
        :meth:`vertex_normal` to get an exception instead.
        """
        acc = np.zeros((self.n_vertices, 3))
        sizes = self.face_sizes
        fid = np.repeat(np.arange(self.n_faces), sizes)
        np.add.at(acc, self.face_vertices, self.face_area_vectors[fid])
        n = np.linalg.norm(acc, axis=1)
        ok = n >= 1e-12
        acc[ok] /= n[ok, None]
        acc[~ok] = 0.0
        return _readonly(acc)

    def vertex_adjacency(self):
        """Symmetric sparse vertex adjacency (CSR, 0/1 entries) over edges."""
        from scipy import sparse

        e = self.edges
        data = np.ones(2 * self.n_edges)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n_vertices,) * 2)

    def hop_distance(self, sources, max_hops=None):
        """Breadth-first hop count from a set of source vertices (-1 = unreachable)."""
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        frontier = np.unique(np.asarray(sources, dtype=np.int64))
        dist[frontier] = 0
        adj = self.vertex_adjacency()
        hop = 0
        while frontier.size and (max_hops is None or hop < max_hops):
            hop += 1
            reach = np.unique(adj[frontier].indices)
            reach = reach[dist[reach] < 0]
            dist[reach] = hop
            frontier = reach
        return dist

    def __repr__(self):
        return (
            f"{type(self).__name__}(n_vertices={self.n_vertices}, "
            f"n_faces={self.n_faces}, n_edges={self.n_edges})"
        )


def _newell(P):
    """Newell normal (twice the vector area) of polygons ``P`` (m, k, 3)."""
    Q = np.roll(P, -1, axis=1)
    return np.stack(
        [
            ((P[..., 1] - Q[..., 1]) * (P[..., 2] + Q[..., 2])).sum(axis=1),
            ((P[..., 2] - Q[..., 2]) * (P[..., 0] + Q[..., 0])).sum(axis=1),
            ((P[..., 0] - Q[..., 0]) * (P[..., 1] + Q[..., 1])).sum(axis=1),
        ],
        axis=1,
    )


@dataclass(frozen=True)
class VertexField:
    """A finite scalar value per mesh vertex (the function coded by the LBP)."""

    values: np.ndarray = field(repr=False)
    name: str = "h"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("vertex field must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"vertex field {self.name!r} contains NaN or Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def check_mesh(self, mesh):
        if len(self) != mesh.n_vertices:
            raise ValueError(
                f"field {self.name!r} has {len(self)} values but mesh has {mesh.n_vertices} vertices"
            )
        return self

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", self.name])
            for i, x in enumerate(self.values.tolist()):
                w.writerow([i, repr(x)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) != 2:
            raise ParseError(f"{path}: expected a two-column CSV with header")
        name = rows[0][1]
        idx = np.array([int(r[0]) for r in rows[1:]])
        vals = np.array([float(r[1]) for r in rows[1:]])
        if not np.array_equal(idx, np.arange(len(idx))):
            raise ParseError(f"{path}: vertex indices must be 0..n-1 in order")
        return cls(vals, name)


# functional aliases mirroring the method API


def vertex_edges(mesh, v):
    return mesh.vertex_edges(v)


def surface_area(mesh):
    """Total area; polygons are fan-triangulated from their first vertex."""
    return mesh.surface_area()


def mean_edge_length(mesh):
    return mesh.mean_edge_length()


def vertex_normal(mesh, v):
    return mesh.vertex_normal(v)


def boundary_distance_filter(mesh, r_max):
    """Cheap admissibility prefilter.

    Returns a boolean mask that is ``False`` for every vertex closer than
    ``r_max`` (Euclidean) to some boundary vertex. Closed meshes are all
    ``True``. The Euclidean distance is a lower bound of the distance along
    the surface, so the mask never rejects a vertex whose spheres stay away
    from the boundary; the ring extraction still has the final word.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    bv = np.flatnonzero(mesh.boundary_vertices)
    if bv.size == 0:
        return np.ones(mesh.n_vertices, dtype=bool)
    d, _ = cKDTree(mesh.vertices[bv]).query(mesh.vertices)
    return d >= r_max
