"""Cotangent Laplace-Beltrami operator and its eigenbasis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .exceptions import EigensolverError
from .mesh import TriangleMesh, vertex_areas

# below this size the generalized problem is solved densely
DENSE_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class LaplacianPair:
    """Cotangent stiffness matrix and lumped (diagonal) mass matrix."""

    stiffness: sparse.csr_matrix
    mass: sparse.dia_matrix


@dataclass(frozen=True, eq=False)
class LboBasis:
    """Mass-orthonormal Laplace-Beltrami eigenfunctions, ascending frequency.

    ``mass`` holds the diagonal of the mass matrix so that coefficients can
    be computed without the original operator.
    """

    Phi: np.ndarray
    frequencies: np.ndarray
    mass: np.ndarray

    @property
    def k(self) -> int:
        return self.Phi.shape[1]

    def truncated(self, k) -> LboBasis:
        return LboBasis(self.Phi[:, :k], self.frequencies[:k], self.mass)


def build_laplacian(mesh: TriangleMesh) -> LaplacianPair:
    """Assemble the cotangent stiffness and barycentric mass matrices.

    Stiffness is positive semi-definite with ``W[i, j] = -(cot a + cot b) / 2``
    for every edge; negative cotangent weights are kept.
    """
    v, f = mesh.vertices, mesh.faces
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for c in range(3):
        i, j, k = f[:, c], f[:, (c + 1) % 3], f[:, (c + 2) % 3]
        e1, e2 = v[j] - v[i], v[k] - v[i]
        cot = np.einsum("ij,ij->i", e1, e2) / np.linalg.norm(np.cross(e1, e2), axis=1)
        # the angle at i is opposite the edge (j, k)
        rows += [j, k]
        cols += [k, j]
        vals += [-0.5 * cot, -0.5 * cot]
    rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    off = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    stiffness = (off + sparse.diags(diag)).tocsr()
    mass = sparse.diags(vertex_areas(mesh).areas)
    return LaplacianPair(stiffness, mass)


def lbo_eigenbasis(lap: LaplacianPair, k: int) -> LboBasis:
    """The ``k`` lowest generalized eigenpairs of ``(stiffness, mass)``."""
    n = lap.stiffness.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    m = lap.mass.diagonal()
    if n <= DENSE_LIMIT:
        evals, evecs = scipy.linalg.eigh(lap.stiffness.toarray(), np.diag(m), subset_by_index=[0, k - 1])
    else:
        v0 = np.random.default_rng(0).uniform(0.5, 1.5, n)
        try:
            evals, evecs = eigsh(lap.stiffness, k=k, M=lap.mass.tocsc(), sigma=-1e-8, which="LM", v0=v0)
        except ArpackNoConvergence as exc:
            raise EigensolverError(
                f"eigensolver converged on {len(exc.eigenvalues)} of {k} pairs", len(exc.eigenvalues)
            ) from None
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    # M-normalize explicitly and fix signs so the result is reproducible
    evecs = evecs / np.sqrt(np.einsum("ij,i,ij->j", evecs, m, evecs))
    idx = np.argmax(np.abs(evecs), axis=0)
    evecs = evecs * np.sign(evecs[idx, np.arange(k)])
    evals = np.where(np.abs(evals) < 1e-10 * max(abs(evals[-1]), 1.0), 0.0, evals)
    return LboBasis(evecs, np.maximum(evals, 0.0), m)


def project(basis: LboBasis, f) -> np.ndarray:
    """Mass-weighted coefficients ``Phi^T M f`` of one or more functions."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != basis.Phi.shape[0]:
        raise ValueError(f"function has {f.shape[0]} values, basis has {basis.Phi.shape[0]} vertices")
    mf = f * basis.mass if f.ndim == 1 else f * basis.mass[:, None]
    return basis.Phi.T @ mf


def reconstruct(basis: LboBasis, coeffs) -> np.ndarray:
    return basis.Phi @ coeffs
