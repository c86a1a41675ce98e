"""OFF / OBJ / ASCII-PLY mesh readers and writers.

Only positions and face connectivity are read; colors, normals and texture
coordinates are ignored.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import EmptyMeshError, ParseError
from .mesh import DEFAULT_FACE_TOLERANCE, SurfaceTessellation

__all__ = ["load_mesh", "read_off", "read_obj", "read_ply", "write_off", "write_obj", "FORMATS"]

FORMATS = ("off", "obj", "ply")


def _tokens(path):
    """Yield whitespace-split, comment-stripped, non-empty lines."""
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                yield line.split()


def read_off(path):
    lines = _tokens(path)
    try:
        head = next(lines)
    except StopIteration:
        raise EmptyMeshError(f"{path}: empty file") from None
    if not head[0].upper().endswith("OFF"):
        raise ParseError(f"{path}: missing OFF header")
    if head[0].upper() != "OFF":
        raise ParseError(f"{path}: unsupported OFF variant {head[0]!r}")
    counts = head[1:] if len(head) > 1 else next(lines, None)
    try:
        n_v, n_f = int(counts[0]), int(counts[1])
    except (TypeError, IndexError, ValueError):
        raise ParseError(f"{path}: bad OFF counts line") from None
    verts = np.empty((n_v, 3))
    try:
        for i in range(n_v):
            verts[i] = [float(x) for x in next(lines)[:3]]
        faces = []
        for _ in range(n_f):
            tok = next(lines)
            k = int(tok[0])
            if len(tok) < k + 1:
                raise ParseError(f"{path}: face line too short: {' '.join(tok)}")
            faces.append([int(x) for x in tok[1:k + 1]])
    except StopIteration:
        raise ParseError(f"{path}: unexpected end of file") from None
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return verts, faces


def read_obj(path):
    verts, faces = [], []
    try:
        for tok in _tokens(path):
            if tok[0] == "v":
                verts.append([float(x) for x in tok[1:4]])
            elif tok[0] == "f":
                face = []
                for ref in tok[1:]:
                    i = int(ref.split("/", 1)[0])
                    face.append(i - 1 if i > 0 else len(verts) + i)
                faces.append(face)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if any(len(v) != 3 for v in verts):
        raise ParseError(f"{path}: vertex with fewer than 3 coordinates")
    return np.array(verts, dtype=np.float64).reshape(-1, 3), faces


def read_ply(path):
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise ParseError(f"{path}: missing ply magic")
        elements = []  # (name, count, [(prop_name, is_list)])
        fmt = None
        while True:
            raw = fh.readline()
            if not raw:
                raise ParseError(f"{path}: unterminated header")
            tok = raw.decode("ascii", errors="replace").split()
            if not tok or tok[0] in ("comment", "obj_info"):
                continue
            if tok[0] == "format":
                fmt = tok[1]
            elif tok[0] == "element":
                elements.append((tok[1], int(tok[2]), []))
            elif tok[0] == "property":
                if not elements:
                    raise ParseError(f"{path}: property before element")
                if tok[1] == "list":
                    elements[-1][2].append((tok[4], True))
                else:
                    elements[-1][2].append((tok[2], False))
            elif tok[0] == "end_header":
                break
        if fmt != "ascii":
            raise ParseError(f"{path}: only ascii PLY is supported (got {fmt!r})")
        body = (line.split() for line in fh.read().decode("ascii", errors="replace").splitlines() if line.strip())

        verts, faces = None, []
        try:
            for name, count, props in elements:
                if name == "vertex":
                    names = [p for p, _ in props]
                    try:
                        cols = [names.index(c) for c in ("x", "y", "z")]
                    except ValueError:
                        raise ParseError(f"{path}: vertex element lacks x/y/z") from None
                    verts = np.empty((count, 3))
                    for i in range(count):
                        tok = next(body)
                        verts[i] = [float(tok[c]) for c in cols]
                elif name == "face":
                    for _ in range(count):
                        tok = next(body)
                        # the vertex index list is the first list property
                        pos = 0
                        for pname, is_list in props:
                            if is_list:
                                k = int(tok[pos])
                                if pname in ("vertex_indices", "vertex_index"):
                                    faces.append([int(x) for x in tok[pos + 1:pos + 1 + k]])
                                pos += k + 1
                            else:
                                pos += 1
                else:
                    for _ in range(count):
                        next(body)
        except StopIteration:
            raise ParseError(f"{path}: unexpected end of file") from None
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
    if verts is None:
        raise EmptyMeshError(f"{path}: no vertex element")
    return verts, faces


_READERS = {"off": read_off, "obj": read_obj, "ply": read_ply}


def load_mesh(path, format=None, *, face_tolerance=DEFAULT_FACE_TOLERANCE):
    """Read a polygon mesh file into a :class:`SurfaceTessellation`.

    Parameters
    ----------
    path : str or path-like
    format : {'off', 'obj', 'ply'}, optional
        Defaults to the file extension.

    Raises
    ------
    ParseError, NonManifoldError, NonConvexFaceError, EmptyMeshError
    """
    path = os.fspath(path)
    fmt = (format or os.path.splitext(path)[1].lstrip(".")).lower()
    if fmt not in _READERS:
        raise ParseError(f"{path}: unknown mesh format {fmt!r}")
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    verts, faces = _READERS[fmt](path)
    if len(verts) == 0 or len(faces) == 0:
        raise EmptyMeshError(f"{path}: mesh has no vertices or no faces")
    return SurfaceTessellation(verts, faces, face_tolerance=face_tolerance)


def write_off(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"OFF\n{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}\n")
        for x, y, z in mesh.vertices.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")
        for f in mesh.faces:
            fh.write(f"{len(f)} {' '.join(map(str, f))}\n")


def write_obj(mesh, path):
    with open(path, "w") as fh:
        for x, y, z in mesh.vertices.tolist():
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for f in mesh.faces:
            fh.write("f " + " ".join(str(i + 1) for i in f) + "\n")
