import math

import numpy as np
import pytest

from edgelbp import (
    DistanceMatrix,
    ParamMismatchError,
    ParseError,
    bhattacharyya_distance,
    chi_squared_distance,
    distance_matrix,
    euclidean_distance,
)
from edgelbp.lbp import descriptor_from_codes
from edgelbp.similarity import cross_distances


def random_descriptor(rng, P=6, n_rings=3, n_v=40, alpha="a1", model_id=None, missing=0.0):
    codes = rng.integers(0, P + 1, size=(n_v, n_rings))
    if alpha == "a2":
        codes = 2 * rng.integers(0, 2**P, size=(n_v, n_rings))
    codes[rng.random(n_v) < missing] = -1
    return descriptor_from_codes(codes, P, 1.0, alpha, model_id=model_id)


def naive(a, b, metric):
    """Loop over every cell in plain Python."""
    x, y = a.histogram.tolist(), b.histogram.tolist()
    if metric == "bhattacharyya":
        bc = [sum(math.sqrt(p * q) for p, q in zip(rx, ry)) for rx, ry in zip(x, y)]
        return math.sqrt(max(0.0, 1.0 - sum(bc) / len(bc)))
    total = 0.0
    for rx, ry in zip(x, y):
        for p, q in zip(rx, ry):
            if metric == "chi2":
                total += (p - q) ** 2 / (p + q) if p + q > 0 else 0.0
            else:
                total += (p - q) ** 2
    return total if metric == "chi2" else math.sqrt(total)


FUNCS = {"bhattacharyya": bhattacharyya_distance, "chi2": chi_squared_distance, "euclidean": euclidean_distance}


class TestPairwise:
    @pytest.mark.parametrize("metric", list(FUNCS))
    def test_self_zero(self, rng, metric):
        d = random_descriptor(rng)
        assert FUNCS[metric](d, d) == 0.0

    def test_disjoint_support(self):
        a = descriptor_from_codes(np.zeros((5, 2), int), 4, 1.0, "a1")
        b = descriptor_from_codes(np.full((5, 2), 3), 4, 1.0, "a1")
        assert bhattacharyya_distance(a, b) == pytest.approx(1.0, abs=1e-15)
        assert chi_squared_distance(a, b) == pytest.approx(4.0)
        assert euclidean_distance(a, b) == pytest.approx(2.0)

    def test_single_cell(self):
        a = descriptor_from_codes(np.array([[0], [1], [1], [1]]), 3, 1.0, "a1")
        b = descriptor_from_codes(np.array([[0], [1], [1], [-1]]), 3, 1.0, "a1")
        assert euclidean_distance(a, b) == pytest.approx(0.25, abs=1e-15)

    def test_empty_rows_chi2(self):
        # most cells are empty on both sides and add nothing
        a = descriptor_from_codes(np.array([[0, 0], [0, 0], [-1, -1]]), 4, 1.0, "a1")
        b = descriptor_from_codes(np.array([[0, 0], [-1, -1], [-1, -1]]), 4, 1.0, "a1")
        assert chi_squared_distance(a, a) == 0.0
        assert chi_squared_distance(a, b) == pytest.approx(2 * (1 / 3) ** 2 / 1.0)

    @pytest.mark.parametrize("metric", list(FUNCS))
    def test_against_naive(self, rng, metric):
        for _ in range(30):
            a = random_descriptor(rng, missing=0.0)
            b = random_descriptor(rng, missing=0.0)
            assert FUNCS[metric](a, b) == pytest.approx(naive(a, b, metric), abs=1e-12)
            assert FUNCS[metric](a, b) == FUNCS[metric](b, a)

    def test_partial_mass_stays_bounded(self, rng):
        for _ in range(50):
            a = random_descriptor(rng, missing=0.5)
            b = random_descriptor(rng, missing=0.2)
            assert 0.0 <= bhattacharyya_distance(a, b) <= 1.0

    def test_alpha2_union_of_bins(self):
        a = descriptor_from_codes(np.array([[2], [4]]), 3, 1.0, "a2")
        b = descriptor_from_codes(np.array([[4], [8]]), 3, 1.0, "a2")
        # cells: 2 -> (.5, 0), 4 -> (.5, .5), 8 -> (0, .5)
        assert euclidean_distance(a, b) == pytest.approx(math.sqrt(0.5))
        assert bhattacharyya_distance(a, b) == pytest.approx(math.sqrt(0.5))

    def test_mismatch(self, rng):
        a = random_descriptor(rng, P=6)
        for b in (random_descriptor(rng, P=7), random_descriptor(rng, n_rings=2), random_descriptor(rng, alpha="a2")):
            for f in FUNCS.values():
                with pytest.raises(ParamMismatchError):
                    f(a, b)


class TestMatrix:
    def test_single(self, rng):
        D = distance_matrix([random_descriptor(rng)])
        assert D.values.tolist() == [[0.0]] and D.model_ids == ("0",)

    def test_identical(self, rng):
        d = random_descriptor(rng)
        assert not distance_matrix([d, d, d]).values.any()

    @pytest.mark.parametrize("metric", list(FUNCS))
    def test_naive_double_loop(self, rng, metric):
        ds = [random_descriptor(rng, model_id=f"m{i}", missing=0.1) for i in range(25)]
        D = distance_matrix(ds, metric)
        assert D.model_ids == tuple(f"m{i}" for i in range(25))
        ref = np.array([[FUNCS[metric](a, b) for b in ds] for a in ds])
        assert np.abs(D.values - ref).max() <= 1e-12
        assert np.array_equal(D.values, D.values.T) and not np.diag(D.values).any()
        assert np.abs(cross_distances(ds[:4], ds, metric) - ref[:4]).max() <= 1e-12

    def test_alpha2_matrix(self, rng):
        ds = [random_descriptor(rng, alpha="a2") for _ in range(6)]
        D = distance_matrix(ds)
        ref = np.array([[bhattacharyya_distance(a, b) for b in ds] for a in ds])
        assert np.abs(D.values - ref).max() <= 1e-12

    def test_permutation(self, rng):
        ds = [random_descriptor(rng) for _ in range(8)]
        ids = [f"m{i}" for i in range(8)]
        perm = rng.permutation(8)
        a = distance_matrix(ds, model_ids=ids)
        b = distance_matrix([ds[i] for i in perm], model_ids=[ids[i] for i in perm])
        assert np.array_equal(a.permuted(perm).values, b.values)

    def test_mismatch(self, rng):
        with pytest.raises(ParamMismatchError):
            distance_matrix([random_descriptor(rng, P=5), random_descriptor(rng, P=6)])

    def test_bad_metric(self, rng):
        with pytest.raises(ValueError):
            distance_matrix([random_descriptor(rng)], "emd")
        assert distance_matrix([random_descriptor(rng)], "chi-squared").metric == "chi2"

    def test_csv_round_trip(self, rng, tmp_path):
        D = distance_matrix([random_descriptor(rng, model_id=f"m{i}") for i in range(6)], "chi2")
        D.to_csv(tmp_path / "d.csv")
        E = DistanceMatrix.from_csv(tmp_path / "d.csv")
        assert np.array_equal(E.values, D.values)
        assert E.model_ids == D.model_ids and E.metric == "chi2"

    def test_csv_errors(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        with pytest.raises(ParseError):
            DistanceMatrix.from_csv(p)
        p.write_text("bhattacharyya,a,b\nb,0,1\na,1,0\n")
        with pytest.raises(ParseError):
            DistanceMatrix.from_csv(p)
        p.write_text("bhattacharyya,a,b\na,0,x\nb,1,0\n")
        with pytest.raises(ParseError):
            DistanceMatrix.from_csv(p)

    @pytest.mark.parametrize(
        "values",
        [[[0, 1], [2, 0]], [[1, 0], [0, 0]], [[0, -1], [-1, 0]], [[0, np.nan], [np.nan, 0]]],
    )
    def test_invariants(self, values):
        with pytest.raises(ValueError):
            DistanceMatrix(values, ["a", "b"], "euclidean")

    def test_unique_ids(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.zeros((2, 2)), ["a", "a"], "euclidean")
