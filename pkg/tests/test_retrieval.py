import json
import math

import numpy as np
import pytest
from oracles import ranked, retrieval_scores

from edgelbp import (
    DistanceMatrix,
    GroundTruth,
    ParseError,
    UndefinedForSingletonClassError,
    confusion_matrix,
    dcg,
    e_measure,
    evaluate,
    nn_ft_st,
    precision_recall,
    rank_lists,
    tier_image,
)
from edgelbp.retrieval import TIER_FT, TIER_NN, TIER_NONE, TIER_ST


def clustered(sizes, within=0.1, across=1.0, flip=False):
    """Distance matrix where same-class pairs sit at ``within`` and others at ``across``."""
    lab = np.repeat(np.arange(len(sizes)), sizes)
    ids = [f"m{i:03d}" for i in range(lab.size)]
    same = lab[:, None] == lab[None, :]
    v = np.where(same, across if flip else within, within if flip else across)
    np.fill_diagonal(v, 0)
    gt = GroundTruth({m: f"c{c}" for m, c in zip(ids, lab)})
    return DistanceMatrix(v, ids, "euclidean"), gt


def random_fixture(rng, n=30, n_classes=3):
    lab = np.arange(n) % n_classes
    rng.shuffle(lab)
    x = rng.normal(size=(n, 2)) + lab[:, None] * 0.8
    v = np.linalg.norm(x[:, None] - x[None], axis=-1)
    v = np.round(v, 1)  # force some ties
    ids = [f"id{int(i)}" for i in rng.permutation(n)]
    gt = GroundTruth({m: f"k{c}" for m, c in zip(ids, lab)})
    return DistanceMatrix(v, ids, "euclidean"), gt, lab


class TestGroundTruth:
    def test_csv(self, tmp_path):
        p = tmp_path / "l.csv"
        p.write_text("model_id,class\na,x\n\nb, y\nc,x\n")
        gt = GroundTruth.from_csv(p)
        assert gt.class_of == {"a": "x", "b": "y", "c": "x"}
        assert gt.class_sizes == {"x": 2, "y": 1} and gt.classes == ("x", "y")
        gt.to_csv(tmp_path / "o.csv")
        assert GroundTruth.from_csv(tmp_path / "o.csv") == gt

    def test_headerless(self, tmp_path):
        p = tmp_path / "l.csv"
        p.write_text("a,x\nb,y\n")
        assert GroundTruth.from_csv(p).model_ids == ("a", "b")

    def test_csv_errors(self, tmp_path):
        p = tmp_path / "l.csv"
        p.write_text("a,x\na,y\n")
        with pytest.raises(ParseError):
            GroundTruth.from_csv(p)
        p.write_text("a\n")
        with pytest.raises(ParseError):
            GroundTruth.from_csv(p)

    def test_missing_label(self):
        with pytest.raises(KeyError):
            GroundTruth({"a": "x"}).labels(["a", "b"])


class TestRanks:
    def test_two(self):
        r = rank_lists(DistanceMatrix([[0, 1], [1, 0]], ["a", "b"], "euclidean"))
        assert r.order.tolist() == [[1], [0]]

    def test_ties_by_id(self):
        ids = ["d", "b", "a", "c"]
        r = rank_lists(DistanceMatrix(np.ones((4, 4)) - np.eye(4), ids, "euclidean"))
        assert [[ids[j] for j in row] for row in r.order] == [list("abc"), list("acd"), list("bcd"), list("abd")]

    def test_naive_sort(self, rng):
        D, _, _ = random_fixture(rng)
        r = rank_lists(D)
        for i in range(len(D)):
            assert r.order[i].tolist() == ranked(D.values.tolist(), i, D.model_ids)


class TestScores:
    def test_perfect(self):
        D, gt = clustered([4, 5, 6])
        rep = evaluate(D, gt)
        assert (rep.nn, rep.ft, rep.st, rep.map, rep.dcg) == (1.0, 1.0, 1.0, 1.0, 1.0)
        assert np.array_equal(rep.confusion, np.diag([4, 5, 6]))
        assert all(p == 1.0 for _, p in rep.pr_curve)

    def test_anti_clustered(self):
        D, gt = clustered([3, 3, 3], flip=True)
        r = rank_lists(D)
        nn, ft, st = nn_ft_st(r, gt)
        assert nn == 0 and ft == 0
        assert st == 0  # 2(|C|-1) = 4 of 8 results, all cross-class
        assert np.trace(confusion_matrix(r, gt)) == 0
        assert dcg(r, gt) < 1

    def test_singleton(self):
        D, gt = clustered([3, 1])
        with pytest.raises(UndefinedForSingletonClassError):
            nn_ft_st(rank_lists(D), gt)
        # the other measures skip queries without relevant models
        _, m_ap = precision_recall(rank_lists(D), gt)
        assert m_ap == 1.0
        assert dcg(rank_lists(D), gt) == 1.0

    def test_counting_oracle(self, rng):
        for _ in range(5):
            D, gt, lab = random_fixture(rng)
            r = rank_lists(D)
            nn, ft, st = nn_ft_st(r, gt)
            _, m_ap = precision_recall(r, gt)
            ref = retrieval_scores(D.values.tolist(), D.model_ids, lab.tolist())
            assert (nn, ft, st) == pytest.approx(ref[:3], abs=1e-15)
            assert m_ap == pytest.approx(ref[3], abs=1e-14)
            cm = confusion_matrix(r, gt)
            assert cm.sum(axis=1).tolist() == [10, 10, 10]
            assert np.trace(cm) / len(D) == pytest.approx(nn, abs=1e-15)

    def test_ap_last(self):
        ids = list("abcde")
        v = np.ones((5, 5)) - np.eye(5)
        v[0, 1] = v[1, 0] = 2.0
        gt = GroundTruth({"a": "x", "b": "x", "c": "y", "d": "y", "e": "y"})
        r = rank_lists(DistanceMatrix(v, ids, "euclidean"))
        hits = [j for j in r.order[0] if gt.class_of[ids[j]] == "x"]
        assert r.order[0].tolist().index(hits[0]) == 3
        # query a contributes 1/4; build the rest from the oracle
        _, m_ap = precision_recall(r, gt)
        ref = retrieval_scores(v.tolist(), ids, [gt.class_of[i] for i in ids])[3]
        assert m_ap == pytest.approx(ref, abs=1e-15)
        gt2 = GroundTruth({"a": "x", "b": "x", "c": "y", "d": "z", "e": "w"})
        # only a and b have relevant models; each finds the other last of 4
        assert precision_recall(r, gt2)[1] == pytest.approx(0.25)

    def test_dcg_hand(self):
        # same-class pairs are always farther than cross-class ones
        v = np.where(np.add.outer([0, 0, 0, 1, 1], [0, 0, 0, 1, 1]) % 2 == 0, 2.0, 1.0)
        np.fill_diagonal(v, 0)
        ids = list("abcde")
        gt = GroundTruth({"a": "x", "b": "x", "c": "x", "d": "y", "e": "y"})
        got = dcg(rank_lists(DistanceMatrix(v, ids, "euclidean")), gt)
        x_query = (1 / math.log2(3) + 1 / math.log2(4)) / 2
        y_query = (1 / math.log2(4)) / 1
        assert got == pytest.approx((3 * x_query + 2 * y_query) / 5, abs=1e-15)
        assert got < 1

    def test_e_measure(self):
        D, gt = clustered([40, 40])
        r = rank_lists(D)
        R = 32 / 39
        assert e_measure(r, gt, 32) == pytest.approx(2 * R / (1 + R), abs=1e-15)
        # the cutoff is clipped to n - 1
        assert e_measure(r, gt, 1000) == pytest.approx(2 * (39 / 79) / (1 + 39 / 79))
        A, gta = clustered([3, 3, 3], flip=True)
        assert e_measure(rank_lists(A), gta, 2) == 0.0
        with pytest.raises(ValueError):
            e_measure(r, gt, 0)

    def test_e_measure_oracle(self, rng):
        D, gt, lab = random_fixture(rng)
        r = rank_lists(D)
        tot = 0.0
        for i in range(len(D)):
            lst = ranked(D.values.tolist(), i, D.model_ids)[:5]
            found = sum(lab[j] == lab[i] for j in lst)
            p, rc = found / 5, found / 9
            tot += 0 if found == 0 else 2 / (1 / p + 1 / rc)
        assert e_measure(r, gt, 5) == pytest.approx(tot / len(D), abs=1e-14)

    def test_pr_curve(self):
        D, gt = clustered([3, 3], flip=True)
        curve, m_ap = precision_recall(rank_lists(D), gt)
        # relevant models at ranks 4 and 5 of 5
        assert curve == [(0.5, pytest.approx(0.25)), (1.0, pytest.approx(0.4))]
        assert m_ap == pytest.approx((0.25 + 0.4) / 2)

    def test_invariant_to_relabel_and_reorder(self, rng):
        D, gt, _ = random_fixture(rng)
        perm = rng.permutation(len(D))
        Dp = D.permuted(perm)
        gt2 = GroundTruth({k: "renamed-" + v for k, v in gt.class_of.items()})
        a, b = evaluate(D, gt), evaluate(Dp, gt2)
        assert a.scores() == pytest.approx(b.scores(), abs=1e-15)

    def test_monotone(self, rng):
        D, gt, lab = random_fixture(rng)
        base = evaluate(D, gt).scores()
        v = D.values.copy()
        q = 0
        same = [j for j in range(len(D)) if lab[j] == lab[q] and j != q]
        v[q, same[0]] = v[same[0], q] = 0.0  # move one relevant model to the front
        better = evaluate(DistanceMatrix(v, D.model_ids, "euclidean"), gt).scores()
        for k in ("nn", "ft", "st", "map", "dcg"):
            assert better[k] >= base[k] - 1e-15


class TestTierImage:
    def test_block_diagonal(self):
        D, gt = clustered([2, 3])
        grid, ids = tier_image(rank_lists(D), gt)
        assert ids == D.model_ids
        assert np.all((grid[:2, :2] != TIER_NONE) == ~np.eye(2, dtype=bool))
        assert np.all((grid[2:, 2:] != TIER_NONE) == ~np.eye(3, dtype=bool))
        assert not np.any(grid[:2, 2:] == TIER_NN)

    def test_cells_match_ranks(self, rng):
        D, gt, lab = random_fixture(rng)
        grid, ids = tier_image(rank_lists(D), gt)
        pos = {m: k for k, m in enumerate(ids)}
        assert np.all((grid == TIER_NN).sum(axis=1) == 1)
        for i, mid in enumerate(D.model_ids):
            lst = ranked(D.values.tolist(), i, D.model_ids)
            c = int(np.sum(lab == lab[i])) - 1
            for rank, j in enumerate(lst):
                want = TIER_NN if rank == 0 else TIER_FT if rank < c else TIER_ST if rank < 2 * c else TIER_NONE
                assert grid[pos[mid], pos[D.model_ids[j]]] == want
        # rows grouped by class
        cls = [gt.class_of[m] for m in ids]
        assert cls == sorted(cls)


def test_report_files(tmp_path):
    D, gt = clustered([3, 4])
    rep = evaluate(D, gt, cutoff=5)
    paths = rep.write(tmp_path, "run")
    data = json.loads(open(paths["json"]).read())
    assert {k: data[k] for k in rep.scores()} == rep.scores()
    assert data["e_cutoff"] == 5 and data["classes"] == ["c0", "c1"]
    assert data["confusion"] == [[3, 0], [0, 4]]
    assert open(paths["confusion"]).read().splitlines()[0] == "class,c0,c1"
    assert open(paths["pr"]).read().splitlines()[0] == "recall,precision"
    raw = open(paths["tier"], "rb").read()
    assert raw.startswith(b"P6\n7 7\n255\n") and len(raw) == len(b"P6\n7 7\n255\n") + 7 * 7 * 3
    pix = np.frombuffer(raw[-147:], np.uint8).reshape(7, 7, 3)
    assert pix[0, 0].tolist() == [255, 255, 255]  # diagonal is never a match
    assert sorted(map(tuple, np.unique(pix.reshape(-1, 3), axis=0))) == [(0, 0, 0), (0, 0, 255), (255, 0, 0), (255, 255, 255)]
