import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodesic_descriptors import (
    MeshParseError,
    MeshValidationError,
    TriangleMesh,
    load_mesh,
    vertex_areas,
    write_mesh,
)
from geodesic_descriptors.shapes import bumpy_sphere, equilateral_triangle, grid_mesh, icosphere, tetrahedron

TETRA_OFF = """OFF
4 4 0
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
"""


def test_off_tetrahedron_counts(tmp_path):
    p = tmp_path / "t.off"
    p.write_text(TETRA_OFF)
    m = load_mesh(p)
    assert (m.n_vertices, m.n_faces) == (4, 4)


def test_off_vertex_shortfall_is_named(tmp_path):
    p = tmp_path / "short.off"
    p.write_text(TETRA_OFF.replace("4 4 0", "5 4 0", 1))
    with pytest.raises(MeshParseError, match="declares 5 vertices"):
        load_mesh(p)


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("OFX\n", "missing OFF header"),
        ("OFF\n4 x 0\n", "malformed element counts"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1\n3 0 1 2\n", "line 5"),
        ("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n", "not a triangle"),
    ],
)
def test_off_malformed(tmp_path, text, pattern):
    p = tmp_path / "bad.off"
    p.write_text(text)
    with pytest.raises(MeshParseError, match=pattern):
        load_mesh(p)


def test_binary_ply_rejected(tmp_path):
    p = tmp_path / "b.ply"
    p.write_bytes(b"ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n")
    with pytest.raises(MeshParseError, match="binary"):
        load_mesh(p)


def test_unknown_suffix(tmp_path):
    p = tmp_path / "m.stl"
    p.write_text("solid")
    with pytest.raises(MeshParseError, match="unsupported"):
        load_mesh(p)


def test_obj_relative_indices_and_texture_refs(tmp_path):
    p = tmp_path / "m.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf -3/1 -2/1 -1/1\n")
    m = load_mesh(p)
    assert m.faces.tolist() == [[0, 1, 2]]


def test_grid_counts_and_area(grid10):
    assert (grid10.n_vertices, grid10.n_faces) == (100, 162)
    assert grid10.total_area() == pytest.approx(1.0, abs=1e-9)


def test_validation_errors():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]], float)
    with pytest.raises(MeshValidationError, match="not referenced"):
        TriangleMesh(v, [[0, 1, 2]])
    with pytest.raises(MeshValidationError, match="outside"):
        TriangleMesh(v[:3], [[0, 1, 3]])
    with pytest.raises(MeshValidationError, match="repeats"):
        TriangleMesh(v[:3], [[0, 1, 1]])
    with pytest.raises(MeshValidationError, match="degenerate"):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
    two = np.vstack([v[:3], v[:3] + 10])
    with pytest.raises(MeshValidationError, match="connected components"):
        TriangleMesh(two, [[0, 1, 2], [3, 4, 5]])


def test_non_manifold_edge_only_warns():
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    with pytest.warns(UserWarning, match="non-manifold"):
        TriangleMesh(v, [[0, 1, 2], [0, 1, 3], [0, 1, 4]])


def test_arrays_are_read_only(grid10):
    with pytest.raises(ValueError):
        grid10.vertices[0, 0] = 1.0


def test_vertex_areas_examples(grid10):
    assert vertex_areas(grid10).total == pytest.approx(1.0, abs=1e-9)
    tri = vertex_areas(equilateral_triangle(1.0)).areas
    np.testing.assert_allclose(tri, math.sqrt(3) / 4 / 3, rtol=1e-12)
    tet = tetrahedron()
    np.testing.assert_allclose(vertex_areas(tet).areas, tet.total_area() / 4, rtol=1e-12)


def test_vertex_areas_invariant_to_face_order():
    m = bumpy_sphere(2)
    rng = np.random.default_rng(3)
    shuffled = TriangleMesh(m.vertices, m.faces[rng.permutation(m.n_faces)])
    np.testing.assert_allclose(vertex_areas(shuffled).areas, vertex_areas(m).areas, rtol=1e-12)


@pytest.mark.parametrize("fmt", ["off", "ply", "obj"])
def test_round_trip(tmp_path, fmt):
    m = bumpy_sphere(2, seed=4)
    p = tmp_path / f"m.{fmt}"
    write_mesh(m, p)
    back = load_mesh(p)
    np.testing.assert_allclose(back.vertices, m.vertices, atol=1e-12, rtol=0)
    np.testing.assert_array_equal(back.faces, m.faces)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.floats(0.1, 10.0))
def test_grid_area_property(nx, ny, w):
    m = grid_mesh(nx, ny, width=w, height=1.0)
    assert m.n_faces == 2 * (nx - 1) * (ny - 1)
    assert m.total_area() == pytest.approx(w, rel=1e-12)
    assert vertex_areas(m).total == pytest.approx(w, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_permuted_preserves_geometry(seed):
    m = icosphere(1)
    perm = np.random.default_rng(seed).permutation(m.n_vertices)
    p = m.permuted(perm)
    np.testing.assert_array_equal(p.vertices[perm], m.vertices)
    assert p.total_area() == pytest.approx(m.total_area(), rel=1e-12)
    np.testing.assert_allclose(vertex_areas(p).areas[perm], vertex_areas(m).areas, rtol=1e-12)


def test_icosphere_counts():
    assert [icosphere(s).n_vertices for s in range(5)] == [12, 42, 162, 642, 2562]


def test_content_hash_tracks_geometry(grid10):
    assert grid10.content_hash() == grid_mesh(10).content_hash()
    assert grid10.content_hash() != grid10.transformed(scale=2.0).content_hash()
