import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from edgelbp import (
    DegenerateNormalError,
    EmptyMeshError,
    NonConvexFaceError,
    NonManifoldError,
    NonPlanarFaceError,
    ParseError,
    SurfaceTessellation,
    VertexField,
    boundary_distance_filter,
    datasets,
    mean_edge_length,
    surface_area,
    vertex_edges,
    vertex_normal,
)


def triangle():
    return SurfaceTessellation([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


class TestConstruction:
    def test_cube_counts(self):
        cube = datasets.make_cube()
        assert (cube.n_vertices, cube.n_edges, cube.n_faces) == (8, 12, 6)
        assert cube.n_vertices - cube.n_edges + cube.n_faces == 2
        assert not cube.boundary_vertices.any()
        assert cube.is_closed

    def test_single_triangle(self):
        t = triangle()
        assert t.n_edges == 3
        assert t.boundary_vertices.all()
        assert not t.is_closed

    def test_edge_with_three_faces(self):
        v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
        with pytest.raises(NonManifoldError):
            SurfaceTessellation(v, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])

    def test_repeated_vertex_in_face(self):
        with pytest.raises(ParseError):
            SurfaceTessellation([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])

    def test_index_out_of_range(self):
        with pytest.raises(ParseError):
            SurfaceTessellation([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])

    def test_empty(self):
        with pytest.raises(EmptyMeshError):
            SurfaceTessellation(np.empty((0, 3)), [[0, 1, 2]])
        with pytest.raises(EmptyMeshError):
            SurfaceTessellation([[0, 0, 0]], [])

    def test_nonconvex_quad(self):
        v = [[0, 0, 0], [2, 0, 0], [0.5, 0.5, 0], [0, 2, 0]]
        with pytest.raises(NonConvexFaceError):
            SurfaceTessellation(v, [[0, 1, 2, 3]])

    def test_nonplanar_quad(self):
        v = [[0, 0, 0], [1, 0, 0], [1, 1, 0.3], [0, 1, 0]]
        with pytest.raises(NonPlanarFaceError):
            SurfaceTessellation(v, [[0, 1, 2, 3]])
        # the planarity check can be switched off
        SurfaceTessellation(v, [[0, 1, 2, 3]], validate=False)

    def test_float_noise_within_tolerance(self):
        v = [[0, 0, 0], [1, 0, 0], [1, 1, 1e-9], [0, 1, 0]]
        SurfaceTessellation(v, [[0, 1, 2, 3]])

    def test_immutable(self):
        cube = datasets.make_cube()
        with pytest.raises(ValueError):
            cube.vertices[0, 0] = 5.0

    def test_edges_match_faces(self, blob):
        pairs = set()
        for f in blob.faces:
            for i in range(len(f)):
                a, b = f[i], f[(i + 1) % len(f)]
                pairs.add((min(a, b), max(a, b)))
        assert pairs == {tuple(e) for e in blob.edges.tolist()}

    def test_edge_faces(self, patch):
        for e, (f0, f1) in enumerate(patch.edge_faces.tolist()):
            a, b = patch.edges[e]
            for f in (f0, f1):
                if f >= 0:
                    assert a in patch.face(f) and b in patch.face(f)
        assert np.array_equal(patch.boundary_edges, patch.edge_faces[:, 1] < 0)


class TestAdjacency:
    def test_regular_grid_valence(self):
        g = datasets.make_grid(5, 5, kind="tri")
        assert len(vertex_edges(g, 12)) == 6

    def test_cube_corner(self):
        assert len(vertex_edges(datasets.make_cube(), 0)) == 3

    def test_triangle_vertex(self):
        assert len(vertex_edges(triangle(), 0)) == 2

    def test_sorted_by_opposite_vertex(self, blob):
        for v in range(0, blob.n_vertices, 37):
            e = blob.edges[blob.vertex_edges(v)]
            other = np.where(e[:, 0] == v, e[:, 1], e[:, 0])
            assert np.all(np.diff(other) > 0)

    def test_round_trip(self, patch):
        for e, (a, b) in enumerate(patch.edges.tolist()):
            assert e in patch.vertex_edges(a)
            assert e in patch.vertex_edges(b)

    def test_invalid_vertex(self):
        with pytest.raises(IndexError):
            vertex_edges(triangle(), 3)
        with pytest.raises(IndexError):
            vertex_edges(triangle(), -1)

    def test_hop_distance(self):
        g = datasets.make_grid(5, 1 + 4, kind="quad")
        d = g.hop_distance([0])
        assert d[0] == 0 and d[24] == 8
        assert g.hop_distance([0], max_hops=2)[24] == -1


class TestMeasures:
    def test_cube_area(self):
        assert surface_area(datasets.make_cube()) == pytest.approx(6.0, abs=1e-15)

    def test_square_triangulation_invariance(self):
        v = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
        quad = SurfaceTessellation(v, [[0, 1, 2, 3]])
        tris = SurfaceTessellation(v, [[0, 1, 2], [0, 2, 3]])
        assert surface_area(quad) == surface_area(tris) == 1.0

    def test_icosphere_area(self):
        s = datasets.make_icosphere(2.0, 4)
        assert s.n_faces >= 5000
        # chords undershoot the sphere: the deficit shrinks with subdivision
        rel = 1 - surface_area(s) / (16 * np.pi)
        assert 0 < rel < 0.01

    def test_mean_edge_length(self):
        cube = datasets.make_cube()
        assert mean_edge_length(cube) == 1.0
        assert mean_edge_length(cube.transformed(scale=2.0)) == 2.0

    def test_mean_edge_length_brute_force(self):
        m = datasets.make_blob(1000, seed=5)
        total = 0.0
        for a, b in m.edges.tolist():
            total += sum((m.vertices[a][i] - m.vertices[b][i]) ** 2 for i in range(3)) ** 0.5
        assert mean_edge_length(m) == pytest.approx(total / m.n_edges, rel=1e-12)

    def test_rigid_motion(self, blob):
        rot = Rotation.from_euler("xyz", [0.3, -1.2, 2.0]).as_matrix()
        moved = blob.transformed(rot, [10.0, -3.0, 7.5])
        assert surface_area(moved) == pytest.approx(surface_area(blob), rel=1e-9)
        assert mean_edge_length(moved) == pytest.approx(mean_edge_length(blob), rel=1e-9)


class TestNormals:
    def test_flat_grid(self):
        g = datasets.make_grid(4, 4, kind="tri")
        assert np.allclose(g.vertex_normals, [0, 0, 1])
        assert np.allclose(vertex_normal(g, 5), [0, 0, 1])

    def test_cube_corner(self):
        n = vertex_normal(datasets.make_cube(), 6)
        assert np.allclose(np.abs(n), 1 / np.sqrt(3))
        assert np.allclose(n, 1 / np.sqrt(3))  # outward winding

    def test_icosphere(self):
        s = datasets.make_icosphere(1.0, 3)
        radial = s.vertices / np.linalg.norm(s.vertices, axis=1, keepdims=True)
        cos = np.einsum("ij,ij->i", s.vertex_normals, radial)
        assert np.degrees(np.arccos(np.clip(cos, -1, 1))).max() < 2.0

    def test_unit_length(self, patch):
        assert np.allclose(np.linalg.norm(patch.vertex_normals, axis=1), 1.0)

    def test_degenerate(self):
        # a duplicated vertex lets two opposite-wound copies of a triangle cancel at vertex 1
        v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 0]]
        m = SurfaceTessellation(v, [[0, 1, 2], [3, 2, 1]])
        with pytest.raises(DegenerateNormalError):
            m.vertex_normal(1)


class TestBoundaryFilter:
    def test_closed(self):
        assert boundary_distance_filter(datasets.make_cube(), 100.0).all()

    def test_disk(self):
        d = datasets.make_disk(1.0, 0.1)
        assert not boundary_distance_filter(d, 1.5).any()

    def test_strip_brute_force(self):
        g = datasets.make_grid(41, 11, spacing=0.5, kind="tri")  # 20 mm x 5 mm
        mask = boundary_distance_filter(g, 1.2)
        V = g.vertices
        B = V[g.boundary_vertices]
        brute = np.array([np.sqrt(((B - p) ** 2).sum(1)).min() >= 1.2 for p in V])
        assert np.array_equal(mask, brute)

    def test_strip_rims(self):
        g = datasets.make_grid(81, 201, spacing=0.25, kind="quad")  # 20 mm wide strip, 50 mm long
        mask = boundary_distance_filter(g, 5.0)
        x, y = g.vertices[:, 0], g.vertices[:, 1]
        inside = (x >= 5) & (x <= 15) & (y >= 5) & (y <= 45)
        assert np.array_equal(mask, inside)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            boundary_distance_filter(datasets.make_cube(), 0.0)


class TestVertexField:
    def test_finite(self):
        with pytest.raises(ValueError):
            VertexField([0.0, np.nan])
        with pytest.raises(ValueError):
            VertexField(np.zeros((2, 2)))

    def test_length_check(self):
        with pytest.raises(ValueError):
            VertexField([1.0, 2.0]).check_mesh(triangle())

    def test_csv_round_trip(self, tmp_path, rng):
        f = VertexField(rng.normal(size=50), "k2")
        f.to_csv(tmp_path / "f.csv")
        g = VertexField.from_csv(tmp_path / "f.csv")
        assert g.name == "k2" and np.array_equal(g.values, f.values)

    def test_read_only(self):
        f = VertexField([1.0, 2.0])
        with pytest.raises(ValueError):
            f.values[0] = 3.0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(0.1, 5.0), st.sampled_from(["tri", "quad"]))
def test_grid_euler_and_area(nx, ny, spacing, kind):
    g = datasets.make_grid(nx, ny, spacing, kind=kind)
    assert g.n_vertices - g.n_edges + g.n_faces == 1
    assert surface_area(g) == pytest.approx((nx - 1) * (ny - 1) * spacing**2, rel=1e-12)
    assert g.boundary_vertices.sum() == 2 * (nx + ny) - 4
