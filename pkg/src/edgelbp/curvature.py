"""Principal curvatures from the normal-cycle curvature tensor.

Every edge of the (fan-triangulated) mesh contributes
``beta(e) * |e| * outer(e_hat, e_hat)``, where ``beta`` is the signed
dihedral angle across the edge. Contributions are split evenly between the
two incident faces, summed over a combinatorial neighborhood of each vertex
and divided by that neighborhood's area. The two eigenvalues of the
averaged tensor whose eigenvectors lie in the tangent plane estimate the
principal curvatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DegenerateNeighborhoodError
from .mesh import VertexField

__all__ = [
    "PrincipalCurvatures",
    "estimate_principal_curvatures",
    "mean_curvature",
    "gaussian_curvature",
    "shape_index",
    "curvedness",
    "curvature_field",
    "FIELD_NAMES",
]

FIELD_NAMES = ("k1", "k2", "K", "H", "SI", "curvedness")

#: dihedral angles below this magnitude (radians) are floating-point noise
DIHEDRAL_NOISE = 1e-10


@dataclass(frozen=True)
class PrincipalCurvatures:
    """Per-vertex minimum (``k1``) and maximum (``k2``) normal curvature, in 1/mm."""

    k1: np.ndarray = field(repr=False)
    k2: np.ndarray = field(repr=False)

    def __post_init__(self):
        k1 = np.array(self.k1, dtype=np.float64)
        k2 = np.array(self.k2, dtype=np.float64)
        if k1.shape != k2.shape or k1.ndim != 1:
            raise ValueError("k1 and k2 must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(k2))):
            raise ValueError("principal curvatures must be finite")
        if np.any(k2 < k1):
            raise ValueError("k2 must be >= k1 at every vertex")
        for a in (k1, k2):
            a.setflags(write=False)
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k2", k2)

    def __len__(self):
        return self.k1.shape[0]


def _edge_tensors(mesh):
    """Per-face accumulated edge tensors (n_faces, 3, 3)."""
    tris, parent = mesh.fan_triangles
    V = mesh.vertices
    n_t = tris.shape[0]

    a = tris.ravel()
    b = tris[:, [1, 2, 0]].ravel()
    tri_of = np.repeat(np.arange(n_t), 3)
    n_v = mesh.n_vertices
    key = np.minimum(a, b) * n_v + np.maximum(a, b)
    order = np.argsort(key, kind="stable")
    key_s = key[order]
    # pair up half-edges that share an undirected edge
    starts = np.flatnonzero(np.r_[True, key_s[1:] != key_s[:-1]])
    counts = np.diff(np.r_[starts, key_s.size])
    paired = starts[counts == 2]
    h1, h2 = order[paired], order[paired + 1]

    cr = np.cross(V[tris[:, 1]] - V[tris[:, 0]], V[tris[:, 2]] - V[tris[:, 0]])
    nrm = np.linalg.norm(cr, axis=1)
    nrm[nrm == 0] = 1.0
    fn = cr / nrm[:, None]

    ev = V[b[h1]] - V[a[h1]]  # edge as traversed by the first triangle
    length = np.linalg.norm(ev, axis=1)
    ok = length > 0
    e_hat = np.zeros_like(ev)
    e_hat[ok] = ev[ok] / length[ok, None]
    n1, n2 = fn[tri_of[h1]], fn[tri_of[h2]]
    # positive on convex edges when faces are wound counterclockwise
    beta = np.arctan2(np.einsum("ij,ij->i", np.cross(n1, n2), e_hat), np.einsum("ij,ij->i", n1, n2))
    beta[np.abs(beta) < DIHEDRAL_NOISE] = 0.0

    T = (0.5 * beta * length)[:, None, None] * (e_hat[:, :, None] * e_hat[:, None, :])
    face_T = np.zeros((mesh.n_faces, 9))
    np.add.at(face_T, parent[tri_of[h1]], T.reshape(-1, 9))
    np.add.at(face_T, parent[tri_of[h2]], T.reshape(-1, 9))
    return face_T


def _neighborhood_faces(mesh, ring_size):
    """Sparse (n_vertices, n_faces) indicator of each vertex's averaging faces.

    ``ring_size=1`` selects the faces around the vertex; each further step
    adds the faces around every vertex one edge-hop farther out.
    """
    n_v = mesh.n_vertices
    sizes = mesh.face_sizes
    fid = np.repeat(np.arange(mesh.n_faces), sizes)
    incidence = sparse.csr_matrix(
        (np.ones(fid.size), (mesh.face_vertices, fid)), shape=(n_v, mesh.n_faces)
    )
    reach = sparse.identity(n_v, format="csr")
    step = mesh.vertex_adjacency() + sparse.identity(n_v, format="csr")
    for _ in range(ring_size - 1):
        reach = reach @ step
        reach.data[:] = 1.0
    region = reach @ incidence
    region.data[:] = 1.0
    return region.tocsr()


def estimate_principal_curvatures(mesh, averaging_ring_size=3):
    """Estimate ``k1 <= k2`` at every vertex.

    Parameters
    ----------
    mesh : SurfaceTessellation
    averaging_ring_size : int, default=3
        Size of the combinatorial neighborhood the tensor is averaged over.

    Returns
    -------
    PrincipalCurvatures

    Raises
    ------
    DegenerateNeighborhoodError
        If some vertex's averaging neighborhood has zero area.
    """
    if int(averaging_ring_size) < 1:
        raise ValueError("averaging_ring_size must be >= 1")
    face_T = _edge_tensors(mesh)
    region = _neighborhood_faces(mesh, int(averaging_ring_size))
    area = region @ mesh.face_areas
    bad = np.flatnonzero(area <= 0)
    if bad.size:
        raise DegenerateNeighborhoodError(f"vertex {int(bad[0])} has a zero-area neighborhood")
    T = (region @ face_T / area[:, None]).reshape(-1, 3, 3)
    T = 0.5 * (T + T.transpose(0, 2, 1))
    w, U = np.linalg.eigh(T)

    normals = mesh.vertex_normals
    align = np.abs(np.einsum("vij,vi->vj", U, normals))
    drop = np.argmax(align, axis=1)
    keep = np.sort(np.stack([np.where(drop == 0, 1, 0), np.where(drop == 2, 1, 2)], axis=1), axis=1)
    pair = np.take_along_axis(w, keep, axis=1)
    pair.sort(axis=1)
    return PrincipalCurvatures(pair[:, 0], pair[:, 1])


def mean_curvature(pc):
    return VertexField(0.5 * (pc.k1 + pc.k2), "H")


def gaussian_curvature(pc):
    return VertexField(pc.k1 * pc.k2, "K")


def shape_index(pc, umbilic_epsilon=1e-8):
    """Shape index ``(2/pi) * arctan((k1 + k2) / (k1 - k2))``.

    Near umbilics (``|k1 - k2| < umbilic_epsilon``) the spherical-cap limit
    ``sign(k1 + k2)`` is used, and 0 when the point is also flat.
    """
    s = pc.k1 + pc.k2
    d = pc.k1 - pc.k2
    umb = np.abs(d) < umbilic_epsilon
    with np.errstate(divide="ignore", invalid="ignore"):
        si = (2.0 / np.pi) * np.arctan(s / np.where(umb, 1.0, d))
    si = np.where(umb, np.sign(s), si)
    si = np.where(umb & (np.abs(s) < umbilic_epsilon), 0.0, si)
    return VertexField(si, "SI")


def curvedness(pc):
    return VertexField(np.sqrt(0.5 * (pc.k1**2 + pc.k2**2)), "curvedness")


def curvature_field(pc, name, umbilic_epsilon=1e-8):
    """Look up a scalar field by name (one of :data:`FIELD_NAMES`)."""
    if name == "k1":
        return VertexField(pc.k1, "k1")
    if name == "k2":
        return VertexField(pc.k2, "k2")
    if name == "H":
        return mean_curvature(pc)
    if name == "K":
        return gaussian_curvature(pc)
    if name == "SI":
        return shape_index(pc, umbilic_epsilon)
    if name == "curvedness":
        return curvedness(pc)
    raise ValueError(f"unknown curvature field {name!r}; expected one of {FIELD_NAMES}")
