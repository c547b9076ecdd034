import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodesic_descriptors import Correspondence, distance_matrix, distortion_curve, objective_table
from geodesic_descriptors.evaluation import DEFAULT_THRESHOLDS, geodesic_errors
from geodesic_descriptors.shapes import grid_mesh


def test_default_thresholds():
    assert DEFAULT_THRESHOLDS[0] == 0.0 and DEFAULT_THRESHOLDS[-1] == 0.25
    assert len(DEFAULT_THRESHOLDS) == 51


def test_truth_against_itself(grid10):
    t = Correspondence(np.arange(100)[::-1].copy())
    c = distortion_curve(t, t, grid10)
    assert c.fractions[0] == 1.0 and c.at(0.0) == 1.0


def test_errors_match_distance_oracle(grid10):
    D = distance_matrix(grid10, symmetrize=False)
    rng = np.random.default_rng(0)
    truth = Correspondence(rng.permutation(100))
    corr = Correspondence(rng.integers(0, 100, 100))
    err = geodesic_errors(corr, truth, grid10)
    np.testing.assert_allclose(err, D[truth.map, corr.map], rtol=1e-12)


def test_collapsed_map_dominated_by_truth(grid10):
    truth = Correspondence.identity(100)
    collapsed = Correspondence(np.full(100, 44))
    a = distortion_curve(truth, truth, grid10).fractions
    b = distortion_curve(collapsed, truth, grid10).fractions
    assert np.all(b <= a)
    assert b[0] == pytest.approx(0.01)


def test_reordering_invariance(grid10):
    rng = np.random.default_rng(1)
    truth = Correspondence(rng.permutation(100))
    corr = Correspondence(rng.integers(0, 100, 100))
    order = rng.permutation(100)
    a = distortion_curve(corr, truth, grid10).fractions
    b = distortion_curve(Correspondence(corr.map[order]), Correspondence(truth.map[order]), grid10).fractions
    np.testing.assert_array_equal(a, b)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 50.0), st.integers(0, 2**32 - 1))
def test_scale_normalization(s, seed):
    m = grid_mesh(8)
    rng = np.random.default_rng(seed)
    truth = Correspondence(rng.permutation(64))
    corr = Correspondence(rng.integers(0, 64, 64))
    scaled = m.transformed(scale=s)
    np.testing.assert_allclose(geodesic_errors(corr, truth, scaled), s * geodesic_errors(corr, truth, m), rtol=1e-9)
    c0 = distortion_curve(corr, truth, m)
    c1 = distortion_curve(corr, truth, scaled)
    np.testing.assert_allclose(c1.errors, c0.errors, rtol=1e-9, atol=1e-12)
    assert np.all(np.diff(c1.fractions) >= 0) and c1.fractions[-1] <= 1.0


def test_curve_contract(grid10):
    t = Correspondence.identity(100)
    with pytest.raises(ValueError):
        distortion_curve(Correspondence.identity(99), t, grid10)
    with pytest.raises(ValueError):
        distortion_curve(t, t, grid10, thresholds=[0.2, 0.1])


def test_objective_table_order_and_sharing(grid10):
    ident = Correspondence.identity(100)
    shift = Correspondence(np.roll(np.arange(100), 1))
    table = objective_table({"b": shift, "a": ident}, grid10, grid10, sample_size=50, seed=3)
    assert [name for name, _ in table] == ["b", "a"]
    assert table[1][1].rms < 1e-3 * distance_matrix(grid10).mean()
    from geodesic_descriptors import gh_objective_sampled

    # one shared sample: each entry equals the standalone value with the same seed
    assert table[0][1] == gh_objective_sampled(shift, grid10, grid10, 50, seed=3)


def test_objective_table_prefers_truth(self_match):
    sm = self_match(0)
    n = sm.mesh1.n_vertices
    for s in range(10):
        rand = Correspondence(np.random.default_rng(s).integers(0, n, n))
        table = dict(objective_table({"truth": sm.truth, "random": rand}, sm.mesh1, sm.mesh2, 200, seed=s))
        assert table["truth"].rms < table["random"].rms
