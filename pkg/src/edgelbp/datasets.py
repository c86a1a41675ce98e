"""Synthetic surface generators used for testing and benchmarking."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .mesh import SurfaceTessellation

__all__ = [
    "make_cube",
    "make_grid",
    "make_disk",
    "make_icosphere",
    "make_cylinder",
    "make_blob",
    "make_relief_patch",
    "RELIEF_PATTERNS",
]


def make_cube(size=1.0):
    """Axis-aligned cube with 6 outward-wound quads."""
    v = np.array(
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
        dtype=np.float64,
    ) * size
    faces = [
        [0, 3, 2, 1],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ]
    return SurfaceTessellation(v, faces)


def make_grid(nx, ny, spacing=1.0, kind="tri", height=None, diagonal="same", origin=(0.0, 0.0)):
    """Regular ``nx`` x ``ny`` vertex grid in the xy-plane, wound counterclockwise.

    Parameters
    ----------
    kind : {'tri', 'quad'}
    height : callable, optional
        ``height(x, y) -> z`` applied to every vertex.
    diagonal : {'same', 'alternate'}
        How quads are split for ``kind='tri'``. ``'same'`` matches the fan
        triangulation used internally for quads.
    """
    xs = origin[0] + spacing * np.arange(nx)
    ys = origin[1] + spacing * np.arange(ny)
    X, Y = np.meshgrid(xs, ys)
    Z = np.zeros_like(X) if height is None else np.asarray(height(X, Y), dtype=np.float64)
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    idx = np.arange(nx * ny).reshape(ny, nx)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    if kind == "quad":
        faces = np.stack([a, b, c, d], axis=1)
    elif kind == "tri":
        if diagonal == "same":
            faces = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
        elif diagonal == "alternate":
            ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
            flip = ((ii + jj) % 2 == 1).ravel()
            t1 = np.where(flip[:, None], np.stack([a, b, d], 1), np.stack([a, b, c], 1))
            t2 = np.where(flip[:, None], np.stack([b, c, d], 1), np.stack([a, c, d], 1))
            faces = np.concatenate([t1, t2])
        else:
            raise ValueError(f"unknown diagonal mode {diagonal!r}")
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return SurfaceTessellation(verts, faces)


def _compact(points2d, z, tris):
    """Drop unreferenced vertices and orient triangles counterclockwise in xy."""
    used = np.unique(tris)
    remap = np.full(points2d.shape[0], -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    tris = remap[tris]
    p = points2d[used]
    cr = (p[tris[:, 1], 0] - p[tris[:, 0], 0]) * (p[tris[:, 2], 1] - p[tris[:, 0], 1]) - (
        p[tris[:, 1], 1] - p[tris[:, 0], 1]
    ) * (p[tris[:, 2], 0] - p[tris[:, 0], 0])
    tris = np.where((cr < 0)[:, None], tris[:, [0, 2, 1]], tris)
    keep = np.abs(cr) > 1e-12 * max(float(np.ptp(p)), 1.0) ** 2
    verts = np.column_stack([p, z[used]])
    return SurfaceTessellation(verts, tris[keep])


def make_disk(radius=1.0, spacing=0.1, seed=0, jitter=0.2):
    """Planar disk triangulated from a jittered hexagonal point set."""
    rng = np.random.default_rng(seed)
    rows = np.arange(-radius, radius + spacing, spacing * np.sqrt(3) / 2)
    pts = []
    for i, y in enumerate(rows):
        xs = np.arange(-radius, radius + spacing, spacing) + (i % 2) * spacing / 2
        pts.extend((x, y) for x in xs)
    pts = np.array(pts)
    pts += rng.uniform(-jitter, jitter, pts.shape) * spacing
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) < radius - 0.5 * spacing]
    n_rim = max(12, int(np.ceil(2 * np.pi * radius / spacing)))
    th = 2 * np.pi * np.arange(n_rim) / n_rim
    pts = np.vstack([[0.0, 0.0], pts[np.hypot(pts[:, 0], pts[:, 1]) > 1e-9], np.column_stack([radius * np.cos(th), radius * np.sin(th)])])
    tri = Delaunay(pts)
    return _compact(pts, np.zeros(len(pts)), tri.simplices)


def make_icosphere(radius=1.0, subdivisions=3):
    """Subdivided icosahedron projected on a sphere centered at the origin."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]],
        dtype=np.float64,
    )
    f = np.array(
        [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]],
        dtype=np.int64,
    )
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    for _ in range(subdivisions):
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        key = np.minimum(e[:, 0], e[:, 1]) * len(v) + np.maximum(e[:, 0], e[:, 1])
        uniq, inv = np.unique(key, return_inverse=True)
        lo, hi = uniq // len(v), uniq % len(v)
        mid = v[lo] + v[hi]
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
        m = inv.reshape(3, -1) + len(v)
        m01, m12, m20 = m
        v = np.vstack([v, mid])
        f = np.concatenate(
            [
                np.stack([f[:, 0], m01, m20], 1),
                np.stack([f[:, 1], m12, m01], 1),
                np.stack([f[:, 2], m20, m12], 1),
                np.stack([m01, m12, m20], 1),
            ]
        )
    return SurfaceTessellation(v * radius, f)


def make_cylinder(radius=1.0, length=4.0, n_around=64, n_along=None, offset=True):
    """Open cylinder around the z-axis with near-equilateral triangles."""
    step = 2 * np.pi * radius / n_around
    dz = step * np.sqrt(3) / 2 if offset else step
    if n_along is None:
        n_along = max(2, int(round(length / dz)) + 1)
    verts = []
    for i in range(n_along):
        shift = (i % 2) * 0.5 if offset else 0.0
        th = 2 * np.pi * (np.arange(n_around) + shift) / n_around
        verts.append(np.column_stack([radius * np.cos(th), radius * np.sin(th), np.full(n_around, i * dz)]))
    verts = np.vstack(verts)
    faces = []
    for i in range(n_along - 1):
        r0, r1 = i * n_around, (i + 1) * n_around
        for j in range(n_around):
            j1 = (j + 1) % n_around
            if offset and i % 2 == 1:
                faces.append([r0 + j, r0 + j1, r1 + j1])
                faces.append([r0 + j, r1 + j1, r1 + j])
            else:
                faces.append([r0 + j, r0 + j1, r1 + j])
                faces.append([r0 + j1, r1 + j1, r1 + j])
    return SurfaceTessellation(verts, faces)


def make_blob(n_vertices=800, roughness=0.15, seed=0, n_waves=6):
    """Random closed genus-0 triangle mesh: a sphere with smooth radial bumps."""
    rng = np.random.default_rng(seed)
    i = np.arange(n_vertices) + 0.5
    phi = np.arccos(1 - 2 * i / n_vertices)
    theta = np.pi * (1 + 5**0.5) * i + rng.uniform(0, 2 * np.pi)
    d = np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])
    d += rng.normal(scale=0.15 / np.sqrt(n_vertices), size=d.shape)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    tris = ConvexHull(d).simplices.astype(np.int64)
    c = d[tris].mean(axis=1)
    nrm = np.cross(d[tris[:, 1]] - d[tris[:, 0]], d[tris[:, 2]] - d[tris[:, 0]])
    flip = np.einsum("ij,ij->i", nrm, c) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    w = rng.normal(size=(n_waves, 3)) * 2.0
    ph = rng.uniform(0, 2 * np.pi, n_waves)
    amp = rng.uniform(0.3, 1.0, n_waves)
    bump = (amp * np.cos(d @ w.T + ph)).sum(axis=1) / amp.sum()
    return SurfaceTessellation(d * (1.0 + roughness * bump)[:, None], tris)


def _hex_dimples(x, y, wavelength, amplitude):
    a = wavelength
    # nearest point of a hexagonal lattice with spacing a
    r = a * np.sqrt(3) / 2
    j = np.round(y / r)
    i = np.round(x / a - 0.5 * (j % 2))
    best = np.full(np.shape(x), np.inf)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            jj = j + dj
            cx = (i + di + 0.5 * (jj % 2)) * a
            cy = jj * r
            best = np.minimum(best, (x - cx) ** 2 + (y - cy) ** 2)
    sigma = 0.18 * a
    return -amplitude * np.exp(-best / (2 * sigma**2))


#: height functions ``f(x, y, wavelength, amplitude)``; the first two are
#: translational (``f = g(x) + h(y)``) so quad grids over them stay planar
RELIEF_PATTERNS = {
    "stripes": lambda x, y, w, a: a * np.sin(2 * np.pi * x / w),
    "eggcrate": lambda x, y, w, a: 0.5 * a * (np.sin(2 * np.pi * x / w) + np.sin(2 * np.pi * y / w)),
    "ripples": lambda x, y, w, a: a * np.sin(2 * np.pi * np.hypot(x - 0.37 * w, y - 0.21 * w) / w),
    "dimples": _hex_dimples,
    "waves": lambda x, y, w, a: 0.5 * a * (np.sin(2 * np.pi * x / w) + np.sin(2 * np.pi * y / (2.3 * w))),
}


def make_relief_patch(pattern="eggcrate", n_vertices=5000, size=(60.0, 70.0), wavelength=5.0,
                      amplitude=0.6, seed=0, jitter=0.3):
    """Height-field patch carrying a repeated relief pattern.

    Vertices come from a jittered grid (so the tessellation is irregular)
    and are Delaunay-triangulated in the plane before lifting.
    """
    rng = np.random.default_rng(seed)
    w, h = size
    s = np.sqrt(w * h / n_vertices)
    nx, ny = int(round(w / s)) + 1, int(round(h / s)) + 1
    X, Y = np.meshgrid(np.linspace(0, w, nx), np.linspace(0, h, ny))
    pts = np.column_stack([X.ravel(), Y.ravel()])
    sx, sy = w / (nx - 1), h / (ny - 1)
    interior = (pts[:, 0] > 0) & (pts[:, 0] < w) & (pts[:, 1] > 0) & (pts[:, 1] < h)
    pts[interior] += rng.uniform(-jitter, jitter, (interior.sum(), 2)) * [sx, sy]
    f = RELIEF_PATTERNS[pattern]
    z = f(pts[:, 0] - w / 2, pts[:, 1] - h / 2, wavelength, amplitude)
    tri = Delaunay(pts)
    return _compact(pts, z, tri.simplices)
