"""Single-source geodesic distances and farthest point sampling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from ._fmm import tables_for
from .exceptions import UnreachableVertexError
from .mesh import TriangleMesh

SOLVERS = ("fast_marching", "dijkstra")


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Geodesic distances from one source vertex to every vertex."""

    source: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered sample vertices and the covering radius they achieve."""

    indices: np.ndarray
    covering_radius: float

    def __len__(self):
        return len(self.indices)


def default_workers() -> int:
    env = os.environ.get("GDD_THREADS")
    return max(1, int(env)) if env else 1


def _check_solver(solver):
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def _distances(mesh, source, solver):
    if solver == "fast_marching":
        d = tables_for(mesh).march(source)
    else:
        d = dijkstra(mesh.adjacency(), directed=False, indices=int(source))
    if not np.all(np.isfinite(d)):
        bad = int(np.flatnonzero(~np.isfinite(d))[0])
        raise UnreachableVertexError(f"vertex {bad} is unreachable from source {source}")
    return d


def geodesic_from(mesh: TriangleMesh, source: int, solver: str = "fast_marching") -> DistanceField:
    """Distances from ``source`` to all vertices.

    ``fast_marching`` solves the eikonal equation on the triangles;
    ``dijkstra`` measures shortest paths along mesh edges and therefore
    overestimates off-axis distances.
    """
    _check_solver(solver)
    source = int(source)
    if not 0 <= source < mesh.n_vertices:
        raise IndexError(f"source {source} outside [0, {mesh.n_vertices})")
    return DistanceField(source, _distances(mesh, source, solver))


def geodesic_rows(mesh, sources, solver="fast_marching", symmetrize=True, workers=None) -> np.ndarray:
    """Stack distance fields for several sources into a (p, n) matrix.

    Row ``i`` holds distances from ``sources[i]``. With ``symmetrize``, the
    entries between two sources (available in both directions) are replaced
    by the average of the two computed values.
    """
    _check_solver(solver)
    idx = np.asarray(sources.indices if isinstance(sources, SampleSet) else sources, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("sources must be a 1-D sequence of vertex indices")
    if len(idx) and (idx.min() < 0 or idx.max() >= mesh.n_vertices):
        raise IndexError(f"source indices must lie in [0, {mesh.n_vertices})")
    rows = np.empty((len(idx), mesh.n_vertices))
    if solver == "dijkstra":
        if len(idx):
            rows[:] = dijkstra(mesh.adjacency(), directed=False, indices=idx)
    else:
        tab = tables_for(mesh)
        workers = default_workers() if workers is None else workers
        if workers > 1 and len(idx) > 1:
            with ThreadPoolExecutor(workers) as pool:
                for i, d in enumerate(pool.map(tab.march, idx)):
                    rows[i] = d
        else:
            for i, s in enumerate(idx):
                rows[i] = tab.march(s)
    if not np.all(np.isfinite(rows)):
        raise UnreachableVertexError("some vertex is unreachable from the sources")
    if symmetrize and len(idx) > 1:
        sub = rows[:, idx]
        rows[:, idx] = 0.5 * (sub + sub.T)
    return rows


def distance_matrix(mesh, solver="fast_marching", symmetrize=True, workers=None) -> np.ndarray:
    """All-pairs geodesic distances; only sensible at desk scale."""
    return geodesic_rows(mesh, np.arange(mesh.n_vertices), solver, symmetrize, workers)


def farthest_point_sampling(mesh, p, seed_vertex=0, solver="fast_marching") -> SampleSet:
    """Greedy farthest point sampling.

    The first sample is ``seed_vertex``; every following sample is the
    vertex farthest from the samples chosen so far, ties going to the
    lowest vertex index.
    """
    n = mesh.n_vertices
    if not 1 <= p <= n:
        raise ValueError(f"sample count p={p} must lie in [1, {n}]")
    if not 0 <= seed_vertex < n:
        raise IndexError(f"seed vertex {seed_vertex} outside [0, {n})")
    chosen = [int(seed_vertex)]
    mind = geodesic_from(mesh, seed_vertex, solver).values.copy()
    mind[seed_vertex] = 0.0
    taken = np.zeros(n, dtype=bool)
    taken[seed_vertex] = True
    while len(chosen) < p:
        cand = np.where(taken, -np.inf, mind)
        nxt = int(np.argmax(cand))
        chosen.append(nxt)
        taken[nxt] = True
        np.minimum(mind, geodesic_from(mesh, nxt, solver).values, out=mind)
        mind[nxt] = 0.0
    return SampleSet(np.array(chosen, dtype=np.int64), float(mind.max()))
