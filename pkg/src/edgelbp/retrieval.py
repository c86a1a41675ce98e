"""Retrieval and classification scores of a distance matrix against class labels."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, UndefinedForSingletonClassError

__all__ = [
    "GroundTruth",
    "RankLists",
    "RetrievalReport",
    "rank_lists",
    "nn_ft_st",
    "precision_recall",
    "e_measure",
    "dcg",
    "confusion_matrix",
    "tier_image",
    "write_tier_ppm",
    "evaluate",
    "TIER_NONE",
    "TIER_NN",
    "TIER_FT",
    "TIER_ST",
]

TIER_NONE, TIER_NN, TIER_FT, TIER_ST = 0, 1, 2, 3
_TIER_COLORS = np.array([[255, 255, 255], [0, 0, 0], [255, 0, 0], [0, 0, 255]], dtype=np.uint8)


@dataclass(frozen=True)
class GroundTruth:
    """Class label of every model."""

    class_of: dict

    def __post_init__(self):
        object.__setattr__(self, "class_of", {str(k): str(v) for k, v in dict(self.class_of).items()})

    @property
    def model_ids(self):
        return tuple(self.class_of)

    @property
    def class_sizes(self):
        sizes = {}
        for c in self.class_of.values():
            sizes[c] = sizes.get(c, 0) + 1
        return sizes

    @property
    def classes(self):
        return tuple(sorted(self.class_sizes))

    def labels(self, model_ids):
        """Integer class index (into :attr:`classes`) for each id."""
        missing = [m for m in model_ids if m not in self.class_of]
        if missing:
            raise KeyError(f"no class label for {missing[:5]}")
        index = {c: i for i, c in enumerate(self.classes)}
        return np.array([index[self.class_of[m]] for m in model_ids], dtype=np.int64)

    @classmethod
    def from_csv(cls, path):
        """Read ``model_id,class`` rows; a header row naming those columns is skipped."""
        out = {}
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < 2:
                    raise ParseError(f"{path}:{i + 1}: expected model_id,class")
                mid, label = row[0].strip(), row[1].strip()
                if i == 0 and (mid.lower(), label.lower()) in (("model_id", "class"), ("id", "class")):
                    continue
                if mid in out:
                    raise ParseError(f"{path}:{i + 1}: duplicate model id {mid!r}")
                out[mid] = label
        return cls(out)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["model_id", "class"])
            w.writerows(self.class_of.items())


@dataclass(frozen=True, eq=False)
class RankLists:
    """``order[i]`` lists the other models by increasing distance to model ``i``."""

    model_ids: tuple
    order: np.ndarray = field(repr=False)


def rank_lists(dist):
    """Sort every row of the matrix, ties broken by model id."""
    ids = dist.model_ids
    n = len(ids)
    lex = np.empty(n, dtype=np.int64)
    lex[np.argsort(np.array(ids, dtype=object), kind="stable")] = np.arange(n)
    order = np.empty((n, max(n - 1, 0)), dtype=np.int64)
    for i in range(n):
        others = np.delete(np.arange(n), i)
        order[i] = others[np.lexsort((lex[others], dist.values[i, others]))]
    return RankLists(ids, order)


def _relevance(ranks, gt):
    lab = gt.labels(ranks.model_ids)
    rel = lab[ranks.order] == lab[:, None]
    n_rel = np.bincount(lab)[lab] - 1
    return lab, rel, n_rel


def nn_ft_st(ranks, gt):
    """Nearest neighbor, first tier and second tier.

    Tiers count same-class models among the first ``|C| - 1`` and
    ``2 (|C| - 1)`` results, divided by ``|C| - 1``.

    Raises
    ------
    UndefinedForSingletonClassError
    """
    _, rel, n_rel = _relevance(ranks, gt)
    if np.any(n_rel < 1):
        raise UndefinedForSingletonClassError("tiers are undefined for a class with one model")
    cum = np.cumsum(rel, axis=1)
    rows = np.arange(rel.shape[0])
    nn = rel[:, 0].astype(float)
    ft = cum[rows, n_rel - 1] / n_rel
    st = cum[rows, np.minimum(2 * n_rel, rel.shape[1]) - 1] / n_rel
    return float(nn.mean()), float(ft.mean()), float(st.mean())


def precision_recall(ranks, gt):
    """Precision/recall curve and mean average precision.

    The curve is sampled at every recall level ``r / (|C| - 1)`` that
    occurs; a query's precision at a level is taken where its recall first
    reaches it. Queries without relevant models are skipped.

    Returns
    -------
    pr_curve : list of (recall, precision)
    mean_ap : float
    """
    _, rel, n_rel = _relevance(ranks, gt)
    q = np.flatnonzero(n_rel > 0)
    if q.size == 0:
        return [], 0.0
    levels = np.unique(np.concatenate([np.arange(1, r + 1) / r for r in np.unique(n_rel[q])]))
    aps = np.empty(q.size)
    curve = np.zeros(levels.size)
    for k, i in enumerate(q):
        hits = np.flatnonzero(rel[i])
        prec = np.arange(1, hits.size + 1) / (hits + 1)
        aps[k] = prec.mean()
        recall = np.arange(1, hits.size + 1) / n_rel[i]
        at = np.searchsorted(recall, levels - 1e-12, side="left")
        curve += prec[at]
    curve /= q.size
    return [(float(r), float(p)) for r, p in zip(levels, curve)], float(aps.mean())


def e_measure(ranks, gt, cutoff=32):
    """Mean harmonic combination of precision and recall over the first ``cutoff`` results."""
    _, rel, n_rel = _relevance(ranks, gt)
    q = np.flatnonzero(n_rel > 0)
    if q.size == 0:
        return 0.0
    k = min(int(cutoff), rel.shape[1])
    if k < 1:
        raise ValueError("cutoff must be >= 1")
    found = rel[q, :k].sum(axis=1)
    p = found / k
    r = found / n_rel[q]
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(found > 0, 2 * p * r / (p + r), 0.0)
    return float(e.mean())


def dcg(ranks, gt):
    """Mean normalized discounted cumulative gain.

    Gain 1 for a same-class result; rank 1 is undiscounted and rank
    ``k >= 2`` is divided by ``log2(k)``. Queries without relevant
    models are skipped.
    """
    _, rel, n_rel = _relevance(ranks, gt)
    q = np.flatnonzero(n_rel > 0)
    if q.size == 0:
        return 0.0
    pos = np.arange(1, rel.shape[1] + 1)
    disc = np.ones(pos.size)
    disc[1:] = 1.0 / np.log2(pos[1:])
    ideal = np.cumsum(disc)
    # sequential sums on both sides so a perfect list scores exactly 1
    scores = np.cumsum(rel[q] * disc, axis=1)[:, -1] / ideal[n_rel[q] - 1]
    return float(scores.mean())


def confusion_matrix(ranks, gt):
    """``cm[i, j]``: models of class ``i`` whose nearest neighbor is of class ``j``.

    Classes are indexed as in :attr:`GroundTruth.classes`.
    """
    lab = gt.labels(ranks.model_ids)
    n_c = len(gt.classes)
    cm = np.zeros((n_c, n_c), dtype=np.int64)
    if ranks.order.shape[1] == 0:
        return cm
    np.add.at(cm, (lab, lab[ranks.order[:, 0]]), 1)
    return cm


def tier_image(ranks, gt):
    """Tier label of every (query, result) cell, rows and columns grouped by class.

    Returns
    -------
    labels : ndarray of int8, shape (n, n)
        ``TIER_NN`` for the nearest neighbor, ``TIER_FT`` for the rest of
        the first ``|C| - 1`` results, ``TIER_ST`` up to ``2 (|C| - 1)``,
        ``TIER_NONE`` elsewhere. The label depends on rank only.
    model_ids : tuple
        Model of each row/column.
    """
    lab, _, n_rel = _relevance(ranks, gt)
    n = len(ranks.model_ids)
    grid = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        o = ranks.order[i]
        r = n_rel[i]
        grid[i, o[r:2 * r]] = TIER_ST
        grid[i, o[:r]] = TIER_FT
        if o.size:
            grid[i, o[0]] = TIER_NN
    perm = np.lexsort((np.array(ranks.model_ids, dtype=object), lab))
    return grid[np.ix_(perm, perm)], tuple(ranks.model_ids[i] for i in perm)


def write_tier_ppm(labels, path, scale=1):
    """Binary PPM: NN black, first tier red, second tier blue, the rest white."""
    img = _TIER_COLORS[np.asarray(labels)]
    if scale > 1:
        img = img.repeat(scale, axis=0).repeat(scale, axis=1)
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


@dataclass(frozen=True, eq=False)
class RetrievalReport:
    nn: float
    ft: float
    st: float
    map: float
    e_measure: float
    dcg: float
    pr_curve: list = field(repr=False)
    classes: tuple = field(repr=False)
    confusion: np.ndarray = field(repr=False)
    tier_labels: np.ndarray = field(repr=False)
    tier_model_ids: tuple = field(repr=False)
    e_cutoff: int = 32

    def scores(self):
        return {"nn": self.nn, "ft": self.ft, "st": self.st, "map": self.map,
                "e_measure": self.e_measure, "dcg": self.dcg}

    def to_json(self):
        d = self.scores()
        d["e_cutoff"] = self.e_cutoff
        d["pr_curve"] = [list(p) for p in self.pr_curve]
        d["classes"] = list(self.classes)
        d["confusion"] = self.confusion.tolist()
        return json.dumps(d, indent=2)

    @staticmethod
    def scores_from_json(text):
        return json.loads(text)

    def write(self, out_dir, prefix="report"):
        """JSON report, confusion/PR CSVs and the tier image; returns the paths."""
        paths = {k: os.path.join(out_dir, f"{prefix}{suffix}") for k, suffix in
                 (("json", ".json"), ("confusion", "_confusion.csv"), ("pr", "_pr.csv"), ("tier", "_tier.ppm"))}
        with open(paths["json"], "w") as fh:
            fh.write(self.to_json())
        with open(paths["confusion"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["class", *self.classes])
            for c, row in zip(self.classes, self.confusion.tolist()):
                w.writerow([c, *row])
        with open(paths["pr"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["recall", "precision"])
            for r, p in self.pr_curve:
                w.writerow([f"{r:.17g}", f"{p:.17g}"])
        write_tier_ppm(self.tier_labels, paths["tier"])
        return paths


def evaluate(dist, gt, cutoff=32):
    """All retrieval and classification scores of ``dist`` in one report."""
    ranks = rank_lists(dist)
    nn, ft, st = nn_ft_st(ranks, gt)
    pr, m_ap = precision_recall(ranks, gt)
    labels, ids = tier_image(ranks, gt)
    return RetrievalReport(
        nn=nn, ft=ft, st=st, map=m_ap, e_measure=e_measure(ranks, gt, cutoff), dcg=dcg(ranks, gt),
        pr_curve=pr, classes=gt.classes, confusion=confusion_matrix(ranks, gt),
        tier_labels=labels, tier_model_ids=ids, e_cutoff=int(cutoff),
    )
