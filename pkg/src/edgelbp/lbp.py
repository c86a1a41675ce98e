"""edgeLBP codes and the per-mesh ring/code histogram.

Each admissible vertex gets one code per ring: the ring is resampled at
``P`` equidistant arc-length positions and every sample is compared with
the value of ``h`` at the vertex. The descriptor counts codes per ring and
divides by the total number of vertices.
"""

from __future__ import annotations

import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import DegenerateRingError, NoAdmissibleVertexError, ParamMismatchError, ParseError
from .mesh import VertexField, boundary_distance_filter
from .rings import _h_array, ring_radii

__all__ = [
    "ALPHAS",
    "RingSamples",
    "EdgeLbpDescriptor",
    "ring_resampling",
    "elbp_code",
    "vertex_codes",
    "compute_descriptor",
    "rmax_from_area",
    "rmax_from_edge_length",
    "save_descriptor",
    "load_descriptor",
    "descriptor_from_codes",
]

ALPHAS = ("a1", "a2")
#: largest P whose a2 codes fit in a signed 64-bit integer
MAX_P_A2 = 62
_MAGIC = "# edgelbp-descriptor v1"


def _check_alpha(alpha):
    a = str(alpha).lower().replace("alpha", "a").replace("α", "a")
    if a not in ALPHAS:
        raise ValueError(f"alpha must be one of {ALPHAS}, got {alpha!r}")
    return a


def _check_P(P, alpha="a1"):
    P = int(P)
    if P < 3:
        raise ValueError(f"P must be >= 3, got {P}")
    if alpha == "a2" and P > MAX_P_A2:
        raise ValueError(f"a2 codes need P <= {MAX_P_A2}, got {P}")
    return P


@dataclass(frozen=True)
class RingSamples:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("samples must be a finite 1-D array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def P(self):
        return self.values.shape[0]


def ring_resampling(ring, P):
    """Sample ``h`` at ``P`` equidistant arc-length positions along a sorted ring.

    The first sample sits on the starting point, so it equals its h value.

    Raises
    ------
    DegenerateRingError
        If the ring has (near) zero length.
    """
    P = _check_P(P)
    pts = ring.rolled()
    pos = np.ascontiguousarray([p.position for p in pts], dtype=np.float64).reshape(-1, 3)
    hv = np.array([p.h_value for p in pts], dtype=np.float64)
    out = np.empty(P)
    if len(pts) == 0 or not K.resample(pos, hv, out):
        raise DegenerateRingError("ring has zero length")
    return RingSamples(out)


def elbp_code(samples, pivot, alpha="a1"):
    """Code of one ring.

    Bit ``j`` (``j = 1..P``) is set when sample ``j`` is not below
    ``pivot``. ``a1`` counts set bits; ``a2`` sums ``2**j`` over them,
    so ``a2`` codes range over even numbers in ``[0, 2**(P+1) - 2]``.
    """
    alpha = _check_alpha(alpha)
    values = samples.values if isinstance(samples, RingSamples) else np.asarray(samples, dtype=np.float64)
    bits = [not (s < pivot) for s in values.tolist()]
    if alpha == "a1":
        return sum(bits)
    return sum(1 << (j + 1) for j, b in enumerate(bits) if b)


def _field_name(h):
    return h.name if isinstance(h, VertexField) and h.name else "h"


def vertex_codes(mesh, h, P=15, n_rings=5, r_max=2.5, alpha="a1", *, n_jobs=1, seeded=True, vertices=None):
    """Per-vertex, per-ring codes.

    Returns
    -------
    codes : ndarray of int64, shape (n_selected, n_rings)
        -1 on every ring of a non-admissible vertex.
    """
    alpha = _check_alpha(alpha)
    P = _check_P(P, alpha)
    hv = _h_array(h, mesh)
    radii = ring_radii(r_max, n_rings)
    centers = np.arange(mesh.n_vertices, dtype=np.int64) if vertices is None else np.asarray(vertices, np.int64)
    out = np.full((centers.size, radii.size), -1, dtype=np.int64)
    M = K.mesh_arrays(mesh)
    n_jobs = _n_jobs(n_jobs)

    def work(lo, hi):
        K.vertex_codes(centers[lo:hi], radii, P, alpha == "a2", bool(seeded), hv, M, out[lo:hi])

    if n_jobs == 1 or centers.size < 2 * n_jobs:
        work(0, centers.size)
    else:
        bounds = np.linspace(0, centers.size, 4 * n_jobs + 1).astype(int)
        with ThreadPoolExecutor(n_jobs) as ex:
            list(ex.map(work, bounds[:-1], bounds[1:]))
    return out


def _n_jobs(n_jobs):
    n_jobs = 1 if n_jobs is None else int(n_jobs)
    if n_jobs < 0:
        n_jobs = max(1, (os.cpu_count() or 1) + 1 + n_jobs)
    return max(1, n_jobs)


@dataclass(frozen=True, eq=False)
class EdgeLbpDescriptor:
    """Ring-by-code histogram of one mesh.

    Attributes
    ----------
    counts : ndarray of int64, shape (n_rings, n_bins)
        Number of admissible vertices per (ring, code).
    bins : ndarray of int64
        Code of each column. For ``a1`` this is ``0..P``; for ``a2`` only
        codes that occur are kept.
    params : dict
        ``P``, ``n_rings``, ``r_max``, ``h`` and ``alpha``.
    n_vertices, n_admissible : int
    model_id : str
    """

    counts: np.ndarray = field(repr=False)
    bins: np.ndarray = field(repr=False)
    params: dict
    n_vertices: int
    n_admissible: int
    model_id: str = ""

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        bins = np.array(self.bins, dtype=np.int64)
        if counts.ndim != 2 or bins.shape != (counts.shape[1],):
            raise ValueError("counts must be (n_rings, n_bins) with one bin code per column")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if bins.size > 1 and np.any(np.diff(bins) <= 0):
            raise ValueError("bins must be strictly increasing")
        params = dict(self.params)
        params["alpha"] = _check_alpha(params["alpha"])
        params["P"] = int(params["P"])
        params["n_rings"] = int(params["n_rings"])
        params["r_max"] = float(params["r_max"])
        params["h"] = str(params.get("h", "h"))
        if counts.shape[0] != params["n_rings"]:
            raise ValueError("counts rows must equal n_rings")
        if int(self.n_vertices) < 1:
            raise ValueError("n_vertices must be >= 1")
        if not 0 <= int(self.n_admissible) <= int(self.n_vertices):
            raise ValueError("n_admissible must lie in [0, n_vertices]")
        if np.any(counts.sum(axis=1) != int(self.n_admissible)):
            raise ValueError("every ring row must count each admissible vertex once")
        for a in (counts, bins):
            a.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "n_vertices", int(self.n_vertices))
        object.__setattr__(self, "n_admissible", int(self.n_admissible))

    @property
    def histogram(self):
        """Counts divided by ``n_vertices``; each row sums to ``n_admissible / n_vertices``."""
        return self.counts / self.n_vertices

    @property
    def key(self):
        """Parameters that must agree for two descriptors to be comparable."""
        return (self.params["P"], self.params["n_rings"], self.params["alpha"])

    def check_compatible(self, other):
        if self.key != other.key:
            raise ParamMismatchError(f"descriptor params {self.key} vs {other.key} (P, n_rings, alpha)")

    def dense(self):
        """Full ``(n_rings, P + 1)`` histogram; only defined for ``a1``."""
        if self.params["alpha"] != "a1":
            raise ValueError("dense histograms only exist for a1; use aligned() for a2")
        return self.histogram

    def aligned(self, bins):
        """Histogram re-indexed on ``bins`` (a superset of ``self.bins``)."""
        bins = np.asarray(bins, dtype=np.int64)
        out = np.zeros((self.counts.shape[0], bins.size))
        out[:, np.searchsorted(bins, self.bins)] = self.histogram
        return out

    def __eq__(self, other):
        if not isinstance(other, EdgeLbpDescriptor):
            return NotImplemented
        return (
            self.params == other.params
            and self.n_vertices == other.n_vertices
            and self.n_admissible == other.n_admissible
            and np.array_equal(self.bins, other.bins)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def to_text(self):
        p = self.params
        buf = io.StringIO()
        buf.write(_MAGIC + "\n")
        buf.write(f"model_id {self.model_id}\n")
        buf.write(f"P {p['P']}\nn_rings {p['n_rings']}\nr_max {p['r_max']!r}\n")
        buf.write(f"h {p['h']}\nalpha {p['alpha']}\n")
        buf.write(f"n_vertices {self.n_vertices}\nn_admissible {self.n_admissible}\n")
        buf.write(f"n_bins {self.bins.size}\n")
        buf.write("bins " + " ".join(map(str, self.bins.tolist())) + "\n")
        for row in self.histogram:
            buf.write(" ".join(f"{x:.17g}" for x in row.tolist()) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or lines[0].strip() != _MAGIC:
            raise ParseError("not an edgelbp descriptor file")
        head = {}
        i = 1
        try:
            while not lines[i].startswith("bins"):
                key, _, val = lines[i].partition(" ")
                head[key] = val.strip()
                i += 1
            bins = [int(x) for x in lines[i].split()[1:]]
            n_rings = int(head["n_rings"])
            n_v = int(head["n_vertices"])
            rows = [[float(x) for x in lines[i + 1 + k].split()] for k in range(n_rings)]
            params = {"P": int(head["P"]), "n_rings": n_rings, "r_max": float(head["r_max"]),
                      "h": head["h"], "alpha": head["alpha"]}
            n_adm = int(head["n_admissible"])
        except (IndexError, KeyError, ValueError) as exc:
            raise ParseError(f"malformed descriptor: {exc}") from None
        hist = np.array(rows, dtype=np.float64).reshape(n_rings, len(bins))
        counts = np.rint(hist * n_v).astype(np.int64)
        if not np.array_equal(counts / n_v, hist):
            raise ParseError("histogram values are not multiples of 1/n_vertices")
        return cls(counts, bins, params, n_v, n_adm, head.get("model_id", ""))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("ring,code,count,value\n")
            hist = self.histogram
            for k in range(self.counts.shape[0]):
                for j, code in enumerate(self.bins.tolist()):
                    fh.write(f"{k + 1},{code},{int(self.counts[k, j])},{hist[k, j]:.17g}\n")


def save_descriptor(desc, path):
    with open(path, "w") as fh:
        fh.write(desc.to_text())


def load_descriptor(path):
    with open(path) as fh:
        return EdgeLbpDescriptor.from_text(fh.read())


def descriptor_from_codes(codes, P, r_max, alpha, h_name="h", model_id=""):
    """Histogram per-vertex codes (rows of -1 are non-admissible)."""
    alpha = _check_alpha(alpha)
    codes = np.asarray(codes, dtype=np.int64)
    n_v, n_r = codes.shape
    adm = codes[:, 0] >= 0
    n_adm = int(adm.sum())
    if n_adm == 0:
        raise NoAdmissibleVertexError("no admissible vertex; r_max is too large for this mesh")
    sel = codes[adm]
    if alpha == "a1":
        bins = np.arange(P + 1)
        counts = np.stack([np.bincount(sel[:, k], minlength=P + 1) for k in range(n_r)])
    else:
        bins = np.unique(sel)
        counts = np.zeros((n_r, bins.size), dtype=np.int64)
        for k in range(n_r):
            np.add.at(counts[k], np.searchsorted(bins, sel[:, k]), 1)
    params = {"P": P, "n_rings": n_r, "r_max": r_max, "h": h_name, "alpha": alpha}
    return EdgeLbpDescriptor(counts, bins, params, n_v, n_adm, model_id)


def compute_descriptor(mesh, h, P=15, n_rings=5, r_max=2.5, alpha="a1", *, n_jobs=1, seeded=True,
                       boundary_prefilter=False, model_id=""):
    """edgeLBP descriptor of a mesh.

    Parameters
    ----------
    mesh : SurfaceTessellation
    h : VertexField or array_like
        Scalar field coded on the rings, typically a curvature.
    P : int, default=15
        Samples per ring.
    n_rings : int, default=5
    r_max : float, default=2.5
        Radius of the outermost ring, in mesh units.
    alpha : {'a1', 'a2'}, default='a1'
    n_jobs : int, default=1
        Worker threads over vertices; the result does not depend on it.
    seeded : bool, default=True
        Grow each ring from the previous one's frontier.
    boundary_prefilter : bool, default=False
        Skip vertices closer than ``r_max`` (straight-line) to a boundary
        vertex. Faster on open patches but may drop vertices whose rings
        would still close.

    Raises
    ------
    NoAdmissibleVertexError
    """
    alpha = _check_alpha(alpha)
    P = _check_P(P, alpha)
    radii = ring_radii(r_max, n_rings)
    n_v = mesh.n_vertices
    if boundary_prefilter:
        todo = np.flatnonzero(boundary_distance_filter(mesh, float(r_max)))
    else:
        todo = None
    sub = vertex_codes(mesh, h, P, radii.size, r_max, alpha, n_jobs=n_jobs, seeded=seeded, vertices=todo)
    if todo is None:
        codes = sub
    else:
        codes = np.full((n_v, radii.size), -1, dtype=np.int64)
        codes[todo] = sub
    return descriptor_from_codes(codes, P, float(r_max), alpha, _field_name(h), model_id)


def rmax_from_area(area):
    """Outer radius as a tenth of the radius of a disk with the given area."""
    area = float(area)
    if not area > 0:
        raise ValueError("area must be positive")
    return 0.1 * math.sqrt(area / math.pi)


def rmax_from_edge_length(edge_length, C=12.0):
    """Outer radius as ``C`` mean edge lengths; ``C`` is expected in [10, 20]."""
    edge_length, C = float(edge_length), float(C)
    if not (edge_length > 0 and C > 0):
        raise ValueError("edge_length and C must be positive")
    if not 10.0 <= C <= 20.0:
        warnings.warn(f"C={C:g} is outside the usual range [10, 20]", UserWarning, stacklevel=2)
    return C * edge_length
