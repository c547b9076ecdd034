import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from geodesic_descriptors import (
    GeodesicBasis,
    Probe,
    LowRankFactorization,
    RankCollapseError,
    approximate_basis,
    build_factorization,
    build_laplacian,
    distance_matrix,
    exact_basis,
    geodesic_rows,
    lbo_eigenbasis,
    make_probe,
    nystrom_factorization,
    orthogonalize,
    reconstruct_entry,
    reconstruction_error_curve,
)
from geodesic_descriptors.basis import projection_error


def best_rank_error(D, k):
    s = np.abs(np.linalg.eigvalsh(D))
    s.sort()
    return math.sqrt(np.sum(s[: len(s) - k] ** 2))


def random_factorization(rng, n, k):
    S = rng.normal(size=(n, k))
    T = rng.normal(size=(k, k))
    return LowRankFactorization(S, T + T.T)


# ------------------------------------------------------------ factorization


def test_all_samples_reach_best_truncation(small_sphere, small_D):
    n = small_sphere.n_vertices
    fact = build_factorization(small_sphere, n)
    rel = np.linalg.norm(small_D - fact.dense()) / np.linalg.norm(small_D)
    best = best_rank_error(small_D, math.ceil(n / 2)) / np.linalg.norm(small_D)
    assert rel <= best * 1.1 + 1e-12


def test_factorization_shapes(sphere):
    fact = build_factorization(sphere, 31)
    assert fact.S.shape == (sphere.n_vertices, 16)
    assert fact.T.shape == (16, 16)
    assert len(fact.samples) == 31


def test_sampled_basis_on_probed_entries(sphere):
    b = approximate_basis(sphere, p=100)
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, sphere.n_vertices, (2, 500))
    d = geodesic_rows(sphere, i, symmetrize=False)[np.arange(500), j]
    dh = np.array([reconstruct_entry(b, a, c) for a, c in zip(i, j)])
    assert np.linalg.norm(d - dh) / np.linalg.norm(d) <= 0.05


def test_sample_count_bounds(grid10):
    with pytest.raises(ValueError):
        build_factorization(grid10, 3)
    with pytest.raises(ValueError):
        build_factorization(grid10, 101)


def test_low_rank_block_warns_and_shrinks():
    rng = np.random.default_rng(0)
    a = rng.normal(size=30)
    rows = np.outer(a[:10], a)  # rank one
    with pytest.warns(UserWarning, match="effective rank"):
        fact = nystrom_factorization(rows, np.arange(10))
    assert fact.k == 1


def test_zero_block_raises():
    with pytest.raises(RankCollapseError) as info:
        nystrom_factorization(np.zeros((6, 20)), np.arange(6))
    assert info.value.effective_rank == 0


def test_convergence_in_sample_count(sphere, sphere_D):
    means = []
    for p in (20, 40, 80):
        errs = [np.linalg.norm(sphere_D - approximate_basis(sphere, p, 10, seed_vertex=s).reconstruct())
                for s in (0, 100, 200, 300, 400)]
        means.append(np.mean(errs))
    assert means[0] >= means[1] >= means[2]


# ------------------------------------------------------------ orthogonalize


def test_orthogonalize_fixed_point():
    rng = np.random.default_rng(2)
    S, _ = np.linalg.qr(rng.normal(size=(30, 4)))
    t = np.array([0.5, -3.0, 2.0, 1.0])
    b = orthogonalize(LowRankFactorization(S, np.diag(t)))
    np.testing.assert_allclose(b.eigenvalues, [-3.0, 2.0, 1.0, 0.5], atol=1e-12)
    order = [1, 2, 3, 0]
    np.testing.assert_allclose(np.abs(b.Q), np.abs(S[:, order]), atol=1e-10)


def test_orthogonalize_random_example():
    fact = random_factorization(np.random.default_rng(7), 50, 6)
    b = orthogonalize(fact)
    M = fact.dense()
    assert np.linalg.norm(b.reconstruct() - M) / np.linalg.norm(M) <= 1e-10
    np.testing.assert_allclose(b.Q.T @ b.Q, np.eye(6), atol=1e-10)
    assert np.all(np.diff(np.abs(b.eigenvalues)) <= 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20), st.integers(20, 120))
def test_orthogonalize_preserves_matrix(seed, k, n):
    fact = random_factorization(np.random.default_rng(seed), n, k)
    b = orthogonalize(fact)
    M = fact.dense()
    assert np.linalg.norm(b.reconstruct() - M) <= 1e-10 * np.linalg.norm(M)
    # canonical signs: largest-magnitude entry of every column is positive
    idx = np.argmax(np.abs(b.Q), axis=0)
    assert np.all(b.Q[idx, np.arange(b.k)] > 0)


# -------------------------------------------------------------- exact basis


def test_exact_identity():
    b = exact_basis(np.eye(5), 3)
    np.testing.assert_allclose(b.eigenvalues, 1.0)
    np.testing.assert_allclose(b.Q.T @ b.Q, np.eye(3), atol=1e-12)
    P = b.Q @ b.Q.T
    np.testing.assert_allclose(b.reconstruct() @ P, P, atol=1e-12)


def test_exact_rank_two():
    rng = np.random.default_rng(0)
    a, c = rng.normal(size=(2, 12))
    D = np.outer(a, c) + np.outer(c, a)
    np.testing.assert_allclose(exact_basis(D, 2).reconstruct(), D, atol=1e-12)


def test_exact_beats_lbo_on_grid(grid10):
    D = distance_matrix(grid10)
    b = exact_basis(D, 10)
    lbo = lbo_eigenbasis(build_laplacian(grid10), 10)
    assert np.linalg.norm(D - b.reconstruct()) <= projection_error(D, lbo.Phi)


def test_exact_guards():
    with pytest.raises(ValueError, match="symmetric"):
        exact_basis(np.array([[0.0, 1.0], [2.0, 0.0]]), 1)
    with pytest.raises(ValueError, match="square"):
        exact_basis(np.zeros((2, 3)), 1)
    with pytest.raises(ValueError):
        exact_basis(np.eye(3), 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_eckart_young_against_random_bases(seed, k):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(30, 30))
    D = A + A.T
    err = np.linalg.norm(D - exact_basis(D, k).reconstruct())
    assert err == pytest.approx(best_rank_error(D, k), rel=1e-9, abs=1e-9)
    assert err <= projection_error(D, rng.normal(size=(30, k))) + 1e-9


# ------------------------------------------------------------ entries/curve


def test_reconstruct_entry_examples(small_D):
    n = small_D.shape[0]
    b = exact_basis(small_D, n)
    scale = small_D.max()
    assert abs(reconstruct_entry(b, 4, 4)) <= 1e-6 * scale
    assert reconstruct_entry(b, 3, 77) == reconstruct_entry(b, 77, 3)
    dense = np.array([[reconstruct_entry(b, i, j) for j in range(0, n, 7)] for i in range(n)])
    assert np.abs(dense - small_D[:, ::7]).max() <= 1e-8 * scale
    with pytest.raises(IndexError):
        reconstruct_entry(b, n, 0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (8, 3), elements=st.floats(-5, 5)), arrays(np.float64, 3, elements=st.floats(-5, 5)))
def test_reconstruct_entry_bitwise_symmetric(Q, lam):
    b = GeodesicBasis(Q, lam)
    for i in range(8):
        for j in range(8):
            assert reconstruct_entry(b, i, j) == reconstruct_entry(b, j, i)


def test_curve_examples(small_sphere, small_D):
    n = small_sphere.n_vertices
    # probe with the columns of the same (symmetrized) D the basis was built from
    src = make_probe(small_sphere, 15, seed=1).sources
    probe = Probe(src, small_D[:, src])
    full = exact_basis(small_D, n)
    lbo = lbo_eigenbasis(build_laplacian(small_sphere), 60)
    curves = reconstruction_error_curve(small_sphere, {"gdb": full, "lbo": lbo}, probe)
    gdb = curves["gdb"]
    assert gdb[-1] <= 1e-8 * np.linalg.norm(probe.values)
    assert np.all(np.diff(gdb) <= 1e-9)
    assert np.all(gdb[:60] <= curves["lbo"] + 1e-9)
    assert list(curves) == ["gdb", "lbo"]


def test_curve_rejects_unknown_basis(small_sphere):
    probe = make_probe(small_sphere, 2)
    with pytest.raises(TypeError):
        reconstruction_error_curve(small_sphere, {"x": object()}, probe)


def test_probe_columns_are_direct_distances(grid10):
    probe = make_probe(grid10, 4, seed=5)
    rows = geodesic_rows(grid10, probe.sources, symmetrize=False)
    np.testing.assert_array_equal(probe.values, rows.T)
