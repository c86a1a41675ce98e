"""Distances between edgeLBP descriptors and dataset distance matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ParamMismatchError, ParseError

__all__ = [
    "METRICS",
    "DistanceMatrix",
    "bhattacharyya_distance",
    "chi_squared_distance",
    "euclidean_distance",
    "distance_matrix",
    "cross_distances",
]

METRICS = ("bhattacharyya", "chi2", "euclidean")


def _pair(a, b):
    a.check_compatible(b)
    if a.params["alpha"] == "a1":
        return a.histogram, b.histogram
    bins = np.union1d(a.bins, b.bins)
    return a.aligned(bins), b.aligned(bins)


# Row-wise kernels on (..., n_rings, n_bins) arrays. distance_matrix and the
# pairwise functions share them so both give the same floating-point result.

def _bhattacharyya(x, y):
    # 1 - BC written as a sum of squares, so d(x, x) == 0 exactly
    sq = 0.5 * np.square(np.sqrt(x) - np.sqrt(y)).sum(axis=-1)
    d2 = sq.mean(axis=-1)
    return np.sqrt(np.clip(d2, 0.0, 1.0))


def _chi2(x, y):
    num = np.square(x - y)
    den = x + y
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, num / safe, 0.0).sum(axis=(-2, -1))


def _euclidean(x, y):
    return np.sqrt(np.square(x - y).sum(axis=(-2, -1)))


_KERNELS = {"bhattacharyya": _bhattacharyya, "chi2": _chi2, "euclidean": _euclidean}


def bhattacharyya_distance(a, b):
    """``sqrt(1 - BC)`` with the coefficient averaged over ring rows.

    Per ring, ``1 - BC`` is evaluated as ``0.5 * sum((sqrt(p) - sqrt(q))**2)``.
    The two forms agree when every row sums to 1; for rows with less mass
    (non-admissible vertices) the squared form still gives zero
    self-distance and stays in [0, 1].

    Raises
    ------
    ParamMismatchError
    """
    x, y = _pair(a, b)
    return float(_bhattacharyya(x, y))


def chi_squared_distance(a, b):
    """Symmetric histogram chi-squared ``sum((p - q)**2 / (p + q))``; empty cells add 0."""
    x, y = _pair(a, b)
    return float(_chi2(x, y))


def euclidean_distance(a, b):
    x, y = _pair(a, b)
    return float(_euclidean(x, y))


_PAIRWISE = {"bhattacharyya": bhattacharyya_distance, "chi2": chi_squared_distance,
             "euclidean": euclidean_distance}


def _check_metric(metric):
    m = str(metric).lower()
    if m in ("chi_squared", "chi-squared", "chi2", "x2"):
        m = "chi2"
    if m not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    return m


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of pairwise descriptor distances."""

    values: np.ndarray = field(repr=False)
    model_ids: tuple
    metric: str

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        ids = tuple(str(i) for i in self.model_ids)
        n = len(ids)
        if v.shape != (n, n):
            raise ValueError(f"values must be {n}x{n}, got {v.shape}")
        if len(set(ids)) != n:
            raise ValueError("model ids must be unique")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("distances must be finite and non-negative")
        if np.any(np.diag(v) != 0):
            raise ValueError("diagonal must be zero")
        if not np.allclose(v, v.T, rtol=0, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "model_ids", ids)
        try:
            metric = _check_metric(self.metric)
        except ValueError:  # matrices produced elsewhere may use other metrics
            metric = str(self.metric)
        object.__setattr__(self, "metric", metric)

    def __len__(self):
        return len(self.model_ids)

    def index(self, model_id):
        return self.model_ids.index(str(model_id))

    def permuted(self, order):
        order = np.asarray(order)
        return DistanceMatrix(self.values[np.ix_(order, order)], [self.model_ids[i] for i in order], self.metric)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.metric, *self.model_ids])
            for mid, row in zip(self.model_ids, self.values.tolist()):
                w.writerow([mid, *(f"{x:.17g}" for x in row)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise ParseError(f"{path}: empty distance matrix file")
        metric, ids = rows[0][0], rows[0][1:]
        try:
            if [r[0] for r in rows[1:]] != ids:
                raise ParseError(f"{path}: row ids do not match column ids")
            values = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
        return cls(values.reshape(len(ids), len(ids)), ids, metric)


def _stack(descriptors):
    first = descriptors[0]
    for d in descriptors[1:]:
        if d.key != first.key:
            raise ParamMismatchError(f"descriptor params {first.key} vs {d.key} (P, n_rings, alpha)")
    if first.params["alpha"] == "a1":
        return np.stack([d.histogram for d in descriptors])
    bins = np.unique(np.concatenate([d.bins for d in descriptors]))
    if len(descriptors) * first.params["n_rings"] * bins.size > 5e7:
        return None
    return np.stack([d.aligned(bins) for d in descriptors])


def distance_matrix(descriptors, metric="bhattacharyya", model_ids=None):
    """Pairwise distances, one evaluation per unordered pair.

    Parameters
    ----------
    descriptors : sequence of EdgeLbpDescriptor
    metric : {'bhattacharyya', 'chi2', 'euclidean'}
    model_ids : sequence of str, optional
        Defaults to each descriptor's ``model_id`` (or its position).

    Raises
    ------
    ParamMismatchError
    """
    metric = _check_metric(metric)
    descriptors = list(descriptors)
    n = len(descriptors)
    if n == 0:
        raise ValueError("need at least one descriptor")
    if model_ids is None:
        model_ids = [d.model_id or str(i) for i, d in enumerate(descriptors)]
    X = _stack(descriptors)
    D = np.zeros((n, n))
    kern = _KERNELS[metric]
    for i in range(n - 1):
        if X is not None:
            D[i, i + 1:] = kern(X[i][None], X[i + 1:])
        else:
            D[i, i + 1:] = [_PAIRWISE[metric](descriptors[i], descriptors[j]) for j in range(i + 1, n)]
    D = D + D.T
    return DistanceMatrix(D, model_ids, metric)


def cross_distances(queries, references, metric="bhattacharyya"):
    """Distances from every query descriptor (rows) to every reference (columns)."""
    metric = _check_metric(metric)
    f = _PAIRWISE[metric]
    out = np.empty((len(queries), len(references)))
    for i, q in enumerate(queries):
        for j, r in enumerate(references):
            out[i, j] = f(q, r)
    return out
