"""Input coercion shared by the estimators and the CLI."""

import os

import numpy as np

from .mesh import SurfaceTessellation, VertexField


def check_mesh(mesh):
    """Return a :class:`SurfaceTessellation` from a mesh, a path or a ``(vertices, faces)`` pair."""
    if isinstance(mesh, SurfaceTessellation):
        return mesh
    if isinstance(mesh, (str, os.PathLike)):
        from .io import load_mesh

        return load_mesh(mesh)
    if isinstance(mesh, tuple) and len(mesh) == 2:
        return SurfaceTessellation(*mesh)
    raise TypeError(f"expected a mesh, a mesh path or (vertices, faces); got {type(mesh).__name__}")


def check_vertex_field(h, mesh, name=None):
    """Return ``h`` as a :class:`VertexField` defined on ``mesh``."""
    if isinstance(h, VertexField):
        h.check_mesh(mesh)
        return h
    values = np.asarray(h, dtype=np.float64)
    field = VertexField(values, name or "h")
    field.check_mesh(mesh)
    return field


def check_positive(value, name, integer=False, minimum=None):
    """Coerce ``value`` and require ``value > 0`` (or ``>= minimum``)."""
    v = int(value) if integer else float(value)
    if integer and v != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    ok = v >= minimum if minimum is not None else v > 0
    if not (np.isfinite(v) and ok):
        bound = f">= {minimum}" if minimum is not None else "> 0"
        raise ValueError(f"{name} must be {bound}, got {value!r}")
    return v
