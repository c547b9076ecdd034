"""Geodesic distance descriptors and the sampled Gromov-Hausdorff objective.

The descriptor of vertex ``i`` is row ``i`` of ``X = Q sqrt(|Lambda|)``.
Negative eigenvalues would make ``X`` complex; instead ``X`` stays real and
a +/-1 signature ``J`` records the sign of each column, so that
``D ~ X diag(J) X^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import GeodesicBasis
from .correspondence import Correspondence
from .geodesics import geodesic_rows

ZERO_EIGENVALUE = 1e-12


@dataclass(frozen=True, eq=False)
class GeodesicDistanceDescriptor:
    """Real descriptor matrix ``X`` (n, k) with column signature and eigenvalues."""

    X: np.ndarray
    signature: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def row(self, i) -> np.ndarray:
        return self.X[i]

    def truncated(self, k) -> GeodesicDistanceDescriptor:
        return GeodesicDistanceDescriptor(self.X[:, :k], self.signature[:k], self.eigenvalues[:k])

    def rotated(self, C) -> GeodesicDistanceDescriptor:
        """``X C`` for a signature-block orthogonal ``C``."""
        return GeodesicDistanceDescriptor(self.X @ C, self.signature, self.eigenvalues)

    def to_basis(self) -> GeodesicBasis:
        return GeodesicBasis(self.X / np.sqrt(np.abs(self.eigenvalues)), self.eigenvalues.copy())

    def reconstruct(self) -> np.ndarray:
        return (self.X * self.signature) @ self.X.T


def build_gdd(basis: GeodesicBasis) -> GeodesicDistanceDescriptor:
    """Scale each basis column by ``sqrt(|lambda|)``; drop (numerically) zero eigenvalues."""
    lam = basis.eigenvalues
    scale = np.abs(lam).max() if len(lam) else 0.0
    keep = np.abs(lam) > ZERO_EIGENVALUE * scale
    lam = lam[keep]
    X = basis.Q[:, keep] * np.sqrt(np.abs(lam))
    return GeodesicDistanceDescriptor(X, np.where(lam > 0, 1.0, -1.0), lam)


def _check(gdd, i, j):
    if not (0 <= i < gdd.n and 0 <= j < gdd.n):
        raise IndexError(f"indices ({i}, {j}) outside [0, {gdd.n})")


def descriptor_distance(gdd, i, j) -> float:
    """Euclidean distance between descriptor rows; the signature is ignored."""
    _check(gdd, i, j)
    d = gdd.X[i] - gdd.X[j]
    return float(np.sqrt(np.dot(d, d)))


def descriptor_distances(gdd, i) -> np.ndarray:
    """Distances from row ``i`` to every row."""
    d = gdd.X - gdd.X[i]
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def reconstruct_distance(gdd, i, j) -> float:
    """Approximate geodesic distance ``sum_c J_c X[i, c] X[j, c]``."""
    _check(gdd, i, j)
    return float(np.dot(gdd.X[i] * gdd.X[j], gdd.signature))


# ------------------------------------------------------- sampled GH objective


@dataclass(frozen=True)
class SampledObjective:
    """Sampled ``||P D1 P^T - D2||_F^2`` and its root-mean-square per entry."""

    rms: float
    raw_sq_sum: float

    def __float__(self):
        return self.rms


def draw_sample(n2, sample_size, seed) -> np.ndarray:
    if sample_size > n2:
        raise ValueError(f"sample size {sample_size} exceeds the {n2} vertices of shape 2")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n2, size=sample_size, replace=False))


def preimages(corr: Correspondence, sample, rows2) -> np.ndarray:
    """For each sampled vertex of shape 2, the shape-1 vertex mapped closest to it.

    ``rows2[a]`` holds geodesic distances on shape 2 from ``sample[a]``. A
    vertex with an exact preimage gets the lowest-index such preimage;
    otherwise the vertex whose image is geodesically nearest is used.
    """
    return np.argmin(rows2[:, corr.map], axis=1)


def objective_from_rows(corr, mesh1, sample, rows2, solver="fast_marching") -> SampledObjective:
    pre = preimages(corr, sample, rows2)
    uniq, inv = np.unique(pre, return_inverse=True)
    rows1 = geodesic_rows(mesh1, uniq, solver, symmetrize=False)
    D1 = rows1[inv][:, pre]
    D2 = rows2[:, sample]
    raw = float(np.sum((D1 - D2) ** 2))
    return SampledObjective(float(np.sqrt(raw / D2.size)), raw)


def gh_objective_sampled(corr, mesh1, mesh2, sample_size=1000, seed=0, solver="fast_marching") -> SampledObjective:
    """Gromov-Hausdorff style distortion of ``corr`` on a random vertex sample.

    ``sample_size`` vertices of shape 2 are drawn; distances among them are
    compared with distances among their preimages on shape 1.
    """
    corr.check_target(mesh2.n_vertices)
    if len(corr) != mesh1.n_vertices:
        raise ValueError("correspondence must map every vertex of shape 1")
    sample = draw_sample(mesh2.n_vertices, sample_size, seed)
    rows2 = geodesic_rows(mesh2, sample, solver, symmetrize=False)
    return objective_from_rows(corr, mesh1, sample, rows2, solver)
