"""scikit-learn style wrappers: meshes in, descriptors / distances / labels out."""

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .curvature import FIELD_NAMES, curvature_field, estimate_principal_curvatures
from .lbp import compute_descriptor
from .similarity import cross_distances
from .validation import check_mesh, check_positive, check_vertex_field


class EdgeLBP(BaseEstimator, TransformerMixin):
    """Mesh -> edgeLBP descriptor.

    Parameters
    ----------
    P : int, default=15
    n_rings : int, default=5
    r_max : float, default=2.5
    alpha : {'a1', 'a2'}, default='a1'
    h : str or callable, default='k2'
        Curvature field name, or ``h(mesh) -> array`` for any other field.
    averaging_ring_size : int, default=3
    n_jobs : int, default=1

    Notes
    -----
    The transform is stateless; ``fit`` only validates parameters.
    """

    def __init__(self, P=15, n_rings=5, r_max=2.5, alpha="a1", h="k2", averaging_ring_size=3, n_jobs=1):
        self.P = P
        self.n_rings = n_rings
        self.r_max = r_max
        self.alpha = alpha
        self.h = h
        self.averaging_ring_size = averaging_ring_size
        self.n_jobs = n_jobs

    def _validate(self):
        check_positive(self.P, "P", integer=True, minimum=3)
        check_positive(self.n_rings, "n_rings", integer=True, minimum=1)
        check_positive(self.r_max, "r_max")
        if not callable(self.h) and self.h not in FIELD_NAMES:
            raise ValueError(f"h must be callable or one of {FIELD_NAMES}, got {self.h!r}")

    def fit(self, X=None, y=None):
        self._validate()
        self.n_features_out_ = self.n_rings * (self.P + 1) if self.alpha == "a1" else None
        return self

    def field(self, mesh):
        mesh = check_mesh(mesh)
        if callable(self.h):
            return check_vertex_field(self.h(mesh), mesh, getattr(self.h, "__name__", "h"))
        pc = estimate_principal_curvatures(mesh, self.averaging_ring_size)
        return curvature_field(pc, self.h)

    def describe(self, X, model_ids=None):
        """List of :class:`EdgeLbpDescriptor`, one per mesh."""
        self._validate()
        out = []
        for i, m in enumerate(X):
            mesh = check_mesh(m)
            mid = model_ids[i] if model_ids is not None else str(i)
            out.append(compute_descriptor(mesh, self.field(mesh), self.P, self.n_rings, self.r_max,
                                          self.alpha, n_jobs=self.n_jobs, model_id=mid))
        return out

    def transform(self, X):
        """Flattened histograms: dense for a1, CSR with columns ``ring * 2**(P+1) + code`` for a2."""
        check_is_fitted(self, "n_features_out_")
        descs = self.describe(X)
        if self.alpha == "a1":
            return np.stack([d.histogram.ravel() for d in descs])
        width = 1 << (self.P + 1)
        rows, cols, vals = [], [], []
        for i, d in enumerate(descs):
            r, c = np.nonzero(d.counts)
            rows.append(np.full(r.size, i))
            cols.append(r * width + d.bins[c])
            vals.append(d.histogram[r, c])
        return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(len(descs), self.n_rings * width))


class DescriptorDistance(BaseEstimator, TransformerMixin):
    """Descriptors -> distances to the descriptors seen in ``fit``."""

    def __init__(self, metric="bhattacharyya"):
        self.metric = metric

    def fit(self, X, y=None):
        self.references_ = list(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "references_")
        return cross_distances(list(X), self.references_, self.metric)


class NearestPatternClassifier(BaseEstimator, ClassifierMixin):
    """1-nearest-neighbor classifier over descriptors.

    Ties go to the earliest training descriptor.
    """

    def __init__(self, metric="bhattacharyya"):
        self.metric = metric

    def fit(self, X, y):
        X = list(X)
        y = np.asarray(y)
        if len(X) != y.shape[0]:
            raise ValueError(f"{len(X)} descriptors but {y.shape[0]} labels")
        if len(X) == 0:
            raise ValueError("need at least one training descriptor")
        self.references_ = X
        self.labels_ = y
        self.classes_ = np.unique(y)
        return self

    def kneighbors_distance(self, X):
        check_is_fitted(self, "references_")
        return cross_distances(list(X), self.references_, self.metric)

    def predict(self, X):
        D = self.kneighbors_distance(X)
        return self.labels_[np.argmin(D, axis=1)]
