"""Geodesic distance basis: exact eigenbasis and sampled low-rank approximation.

The distance matrix ``D`` is symmetric and indefinite. Its eigenvectors,
ordered by decreasing eigenvalue magnitude, give the Frobenius-optimal
truncated representation of ``D``. For large meshes the basis is
approximated from ``p`` sampled distance rows: a factorization
``D ~ S T S^T`` is built first and then rotated into eigenform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import RankCollapseError
from .geodesics import SampleSet, farthest_point_sampling, geodesic_rows
from .lbo import LboBasis

EXACT_LIMIT = 4000
PINV_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class LowRankFactorization:
    """``D ~ S @ T @ S.T`` with ``S`` of shape (n, k) and symmetric ``T`` (k, k)."""

    S: np.ndarray
    T: np.ndarray
    samples: SampleSet | None = None

    @property
    def k(self) -> int:
        return self.S.shape[1]

    def dense(self) -> np.ndarray:
        return self.S @ self.T @ self.S.T


@dataclass(frozen=True, eq=False)
class GeodesicBasis:
    """Orthonormal columns ``Q`` with signed eigenvalues of decreasing magnitude."""

    Q: np.ndarray
    eigenvalues: np.ndarray

    @property
    def k(self) -> int:
        return self.Q.shape[1]

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def truncated(self, k) -> GeodesicBasis:
        return GeodesicBasis(self.Q[:, :k], self.eigenvalues[:k])

    def reconstruct(self, k=None) -> np.ndarray:
        """Dense ``Q_k diag(lambda_k) Q_k^T``."""
        k = self.k if k is None else k
        Q = self.Q[:, :k]
        return (Q * self.eigenvalues[:k]) @ Q.T


def _canonical(Q, lam, k):
    """Sort by decreasing |lambda|, keep ``k``, make each column's largest entry positive."""
    order = np.argsort(-np.abs(lam), kind="stable")[:k]
    Q, lam = Q[:, order], lam[order]
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return np.ascontiguousarray(Q * signs), lam


def nystrom_factorization(rows, samples) -> LowRankFactorization:
    """Factorize from sampled rows ``rows = D[samples, :]`` of shape (p, n).

    The p x p block at the sample columns is eigendecomposed, the
    ``ceil(p / 2)`` largest-magnitude pairs ``(U, sigma)`` are kept and the
    remaining vertices are extended with ``S = rows^T U / sigma``, ``T = diag(sigma)``.
    """
    idx = np.asarray(samples.indices if isinstance(samples, SampleSet) else samples)
    p = len(idx)
    block = rows[:, idx]
    block = 0.5 * (block + block.T)
    sigma, U = np.linalg.eigh(block)
    top = np.abs(sigma).max()
    effective = int(np.sum(np.abs(sigma) >= PINV_CUTOFF * top)) if top > 0 else 0
    if effective == 0:
        raise RankCollapseError("sampled distance block is numerically zero", 0)
    k = math.ceil(p / 2)
    if effective < k:
        warnings.warn(f"sampled block has effective rank {effective} < {k}; truncating", stacklevel=2)
        k = effective
    order = np.argsort(-np.abs(sigma), kind="stable")[:k]
    sigma, U = sigma[order], U[:, order]
    S = rows.T @ (U / sigma)
    samples = samples if isinstance(samples, SampleSet) else SampleSet(idx, float("nan"))
    return LowRankFactorization(S, np.diag(sigma), samples)


def build_factorization(mesh, p, solver="fast_marching", seed_vertex=0, workers=None) -> LowRankFactorization:
    """Sample ``p`` vertices by farthest point sampling and factorize their distance rows."""
    n = mesh.n_vertices
    if not 4 <= p <= n:
        raise ValueError(f"sample count p={p} must lie in [4, {n}]")
    samples = farthest_point_sampling(mesh, p, seed_vertex, solver)
    rows = geodesic_rows(mesh, samples, solver, symmetrize=True, workers=workers)
    return nystrom_factorization(rows, samples)


def orthogonalize(fact: LowRankFactorization) -> GeodesicBasis:
    """Rotate ``S T S^T`` into eigenform ``Q diag(lambda) Q^T``.

    With ``S = QR``, the eigendecomposition ``R T R^T = V diag(lambda) V^T``
    gives the orthonormal basis ``Q V``. The reconstructed matrix is
    unchanged; only its representation is.
    """
    Q, R = np.linalg.qr(fact.S)
    core = R @ fact.T @ R.T
    lam, V = np.linalg.eigh(0.5 * (core + core.T))
    Q, lam = _canonical(Q @ V, lam, len(lam))
    return GeodesicBasis(Q, lam)


def exact_basis(D, k) -> GeodesicBasis:
    """Top-``k`` eigenpairs (by magnitude) of a dense symmetric distance matrix."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n):
        raise ValueError(f"D must be square, got {D.shape}")
    if n > EXACT_LIMIT:
        raise ValueError(f"dense eigendecomposition limited to n <= {EXACT_LIMIT}, got {n}")
    scale = max(1.0, float(np.abs(D).max()))
    if np.abs(D - D.T).max() > 1e-8 * scale:
        raise ValueError("D is not symmetric")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    lam, Q = np.linalg.eigh(0.5 * (D + D.T))
    Q, lam = _canonical(Q, lam, k)
    return GeodesicBasis(Q, lam)


def approximate_basis(mesh, p=100, k=None, solver="fast_marching", seed_vertex=0, workers=None) -> GeodesicBasis:
    """Sampled basis in one call; ``k`` defaults to ``ceil(p / 2)``."""
    basis = orthogonalize(build_factorization(mesh, p, solver, seed_vertex, workers))
    return basis if k is None else basis.truncated(k)


def reconstruct_entry(basis: GeodesicBasis, i, j) -> float:
    """``sum_c Q[i, c] * lambda_c * Q[j, c]``; exactly symmetric in ``(i, j)``."""
    n = basis.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"indices ({i}, {j}) outside [0, {n})")
    return float(np.dot(basis.Q[i] * basis.Q[j], basis.eigenvalues))


# ------------------------------------------------------ reconstruction curves


@dataclass(frozen=True, eq=False)
class Probe:
    """Ground-truth distance columns: ``values[:, c]`` are distances from ``sources[c]``."""

    sources: np.ndarray
    values: np.ndarray


def make_probe(mesh, count, seed=0, solver="fast_marching") -> Probe:
    """Distances from ``count`` random source vertices, computed directly."""
    rng = np.random.default_rng(seed)
    src = np.sort(rng.choice(mesh.n_vertices, size=count, replace=False))
    rows = geodesic_rows(mesh, src, solver, symmetrize=False)
    return Probe(src, rows.T.copy())


def _curve_gdb(basis, probe, kmax):
    R = probe.values.copy()
    out = np.empty(kmax)
    for c in range(kmax):
        q = basis.Q[:, c]
        R -= basis.eigenvalues[c] * np.outer(q, q[probe.sources])
        out[c] = np.linalg.norm(R)
    return out


def _curve_projection(Phi, coeffs, probe, kmax):
    R = probe.values.copy()
    out = np.empty(kmax)
    for c in range(kmax):
        R -= np.outer(Phi[:, c], coeffs[c])
        out[c] = np.linalg.norm(R)
    return out


def reconstruction_error_curve(mesh, bases, probe: Probe, kmax=None) -> dict:
    """Root-sum-square probe error of every k-truncated reconstruction.

    ``bases`` maps a name to a :class:`GeodesicBasis` (reconstructed as
    ``Q_k Lambda_k Q_k^T``) or an :class:`~.lbo.LboBasis` (reconstructed by
    mass-weighted projection ``Phi_k Phi_k^T M D``). Returns name -> array
    whose entry ``k - 1`` is the error with ``k`` basis vectors.
    """
    if len(probe.sources) == 0:
        raise ValueError("probe set is empty")
    if mesh is not None and probe.values.shape[0] != mesh.n_vertices:
        raise ValueError("probe does not match the mesh")
    curves = {}
    for name, b in bases.items():
        if isinstance(b, GeodesicBasis):
            km = b.k if kmax is None else min(kmax, b.k)
            curves[name] = _curve_gdb(b, probe, km)
        elif isinstance(b, LboBasis):
            km = b.k if kmax is None else min(kmax, b.k)
            coeffs = b.Phi[:, :km].T @ (probe.values * b.mass[:, None])
            curves[name] = _curve_projection(b.Phi, coeffs, probe, km)
        else:
            raise TypeError(f"unsupported basis type {type(b).__name__} for {name!r}")
    return curves


def projection_error(D, B) -> float:
    """``||D - P D||_F`` for the orthogonal projector ``P`` onto span(B)."""
    Qb, _ = np.linalg.qr(B)
    return float(np.linalg.norm(D - Qb @ (Qb.T @ D)))
