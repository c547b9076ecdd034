import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import shortest_path

from geodesic_descriptors import (
    UnreachableVertexError,
    distance_matrix,
    farthest_point_sampling,
    geodesic_from,
    geodesic_rows,
)
from geodesic_descriptors.shapes import grid_mesh, icosphere


def planar_error(n):
    """Largest fast-marching error from the corner of an n x n unit grid."""
    m = grid_mesh(n)
    d = geodesic_from(m, 0).values
    return np.abs(d - np.linalg.norm(m.vertices, axis=1)).max()


def test_self_distance_is_zero(grid10):
    for s in (0, 37, 99):
        assert geodesic_from(grid10, s).values[s] == 0.0
        assert geodesic_from(grid10, s, "dijkstra").values[s] == 0.0


def test_corner_to_corner_fast_marching(grid10):
    assert geodesic_from(grid10, 0).values[99] == pytest.approx(math.sqrt(2), rel=0.05)


def test_dijkstra_bounds(grid10):
    fm = geodesic_from(grid10, 0).values
    dj = geodesic_from(grid10, 0, "dijkstra").values
    exact = np.linalg.norm(grid10.vertices, axis=1)
    # oracle: brute-force shortest paths on the edge graph
    brute = shortest_path(grid10.adjacency().toarray(), directed=False)[0]
    np.testing.assert_allclose(dj, brute, rtol=1e-12)
    assert np.all(dj >= fm - 1e-9)
    assert np.all(dj <= 2 / math.sqrt(2) * exact + 1e-12)


def test_refinement_is_monotone():
    errs = [planar_error(n) for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_fast_marching_never_undercuts_on_plane():
    m = grid_mesh(15)
    d = geodesic_from(m, 7).values
    exact = np.linalg.norm(m.vertices - m.vertices[7], axis=1)
    assert np.all(d >= exact - 1e-12)


def test_sphere_great_circle():
    m = icosphere(4)
    d = geodesic_from(m, 0).values
    cos = np.clip(m.vertices @ m.vertices[0], -1, 1)
    # polyhedral approximation; errors peak near the antipode
    np.testing.assert_allclose(d, np.arccos(cos), atol=0.0125 * math.pi)


def test_rows_stack_single_fields(grid10):
    r = geodesic_rows(grid10, [5], symmetrize=False)
    np.testing.assert_array_equal(r[0], geodesic_from(grid10, 5).values)
    src = np.array([0, 14, 99, 51])
    rows = geodesic_rows(grid10, src)
    assert np.all(rows[np.arange(4), src] == 0)


def test_symmetrization_averages_sampled_block(grid10):
    src = np.array([3, 40, 77, 99])
    raw = geodesic_rows(grid10, src, symmetrize=False)
    sym = geodesic_rows(grid10, src)
    blk = raw[:, src]
    np.testing.assert_allclose(sym[:, src], 0.5 * (blk + blk.T), rtol=0, atol=0)
    assert np.abs(blk - blk.T).max() <= 0.02 * raw.max()


def test_threads_do_not_change_results(grid10):
    a = geodesic_rows(grid10, np.arange(30), workers=1)
    b = geodesic_rows(grid10, np.arange(30), workers=3)
    np.testing.assert_array_equal(a, b)


def test_distance_matrix_symmetric(grid10):
    D = distance_matrix(grid10)
    np.testing.assert_array_equal(D, D.T)


def test_bad_source_and_solver(grid10):
    with pytest.raises(IndexError):
        geodesic_from(grid10, 100)
    with pytest.raises(ValueError, match="unknown solver"):
        geodesic_from(grid10, 0, "heat")


def test_unreachable_error_type():
    assert issubclass(UnreachableVertexError, ArithmeticError)


def test_fps_examples(grid10):
    assert farthest_point_sampling(grid10, 1, seed_vertex=42).indices.tolist() == [42]
    assert farthest_point_sampling(grid10, 2, seed_vertex=0).indices.tolist() == [0, 99]
    full = farthest_point_sampling(grid10, 100)
    assert sorted(full.indices.tolist()) == list(range(100))
    assert full.covering_radius == 0.0


def test_fps_matches_brute_force(grid10):
    D = distance_matrix(grid10, symmetrize=False)
    chosen = [0]
    for _ in range(9):
        mind = D[chosen].min(axis=0)
        mind[chosen] = -1
        chosen.append(int(np.argmax(mind)))
    assert farthest_point_sampling(grid10, 10).indices.tolist() == chosen


def test_fps_deterministic(small_sphere):
    a = farthest_point_sampling(small_sphere, 20, seed_vertex=3)
    b = farthest_point_sampling(small_sphere, 20, seed_vertex=3)
    np.testing.assert_array_equal(a.indices, b.indices)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 99))
def test_fps_covering_radius_non_increasing(seed_vertex):
    m = grid_mesh(10)
    radii = [farthest_point_sampling(m, p, seed_vertex).covering_radius for p in (1, 3, 6, 12)]
    assert all(a >= b for a, b in zip(radii, radii[1:]))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 20.0), st.integers(0, 99))
def test_fast_marching_scales_linearly(s, src):
    m = grid_mesh(10)
    d = geodesic_from(m, src).values
    ds = geodesic_from(m.transformed(scale=s), src).values
    np.testing.assert_allclose(ds, s * d, rtol=1e-10, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rigid_motion_invariance(seed):
    from scipy.stats import special_ortho_group

    m = icosphere(2)
    R = special_ortho_group.rvs(3, random_state=seed)
    d = geodesic_from(m, 5).values
    dr = geodesic_from(m.transformed(R, [1.0, -2.0, 0.5]), 5).values
    np.testing.assert_allclose(dr, d, atol=1e-10)
