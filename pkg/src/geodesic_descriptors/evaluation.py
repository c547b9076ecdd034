"""Correspondence quality: distortion curves and the sampled GH objective table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correspondence import Correspondence
from .descriptors import SampledObjective, draw_sample, objective_from_rows
from .geodesics import geodesic_rows

DEFAULT_THRESHOLDS = np.round(np.arange(0.0, 0.25 + 1e-12, 0.005), 3)


@dataclass(frozen=True, eq=False)
class DistortionCurve:
    """Fraction of vertices whose normalized geodesic error is within each threshold."""

    thresholds: np.ndarray
    fractions: np.ndarray
    errors: np.ndarray

    def at(self, threshold) -> float:
        return float(np.mean(self.errors <= threshold))


def geodesic_errors(corr: Correspondence, truth: Correspondence, mesh2, solver="fast_marching") -> np.ndarray:
    """Geodesic distance on shape 2 between each mapped and true target (unnormalized)."""
    if len(corr) != len(truth):
        raise ValueError(f"correspondence covers {len(corr)} vertices, truth covers {len(truth)}")
    corr.check_target(mesh2.n_vertices)
    truth.check_target(mesh2.n_vertices)
    wrong = np.flatnonzero(corr.map != truth.map)
    err = np.zeros(len(truth))
    if len(wrong):
        src, inv = np.unique(truth.map[wrong], return_inverse=True)
        rows = geodesic_rows(mesh2, src, solver, symmetrize=False)
        err[wrong] = rows[inv, corr.map[wrong]]
    return err


def distortion_curve(corr, truth, mesh2, thresholds=None, solver="fast_marching") -> DistortionCurve:
    """Cumulative error curve with errors divided by ``sqrt(area(mesh2))``."""
    thresholds = DEFAULT_THRESHOLDS if thresholds is None else np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) < 0) or np.any(thresholds < 0):
        raise ValueError("thresholds must be non-negative and ascending")
    err = geodesic_errors(corr, truth, mesh2, solver) / np.sqrt(mesh2.total_area())
    fractions = np.array([np.mean(err <= t) for t in thresholds])
    return DistortionCurve(thresholds, fractions, err)


def objective_table(corrs: dict, mesh1, mesh2, sample_size=1000, seed=0, solver="fast_marching") -> list:
    """Score several maps on one shared vertex sample.

    Returns ``[(name, SampledObjective), ...]`` in input order.
    """
    sample = draw_sample(mesh2.n_vertices, sample_size, seed)
    rows2 = geodesic_rows(mesh2, sample, solver, symmetrize=False)
    table = []
    for name, corr in corrs.items():
        corr.check_target(mesh2.n_vertices)
        if len(corr) != mesh1.n_vertices:
            raise ValueError(f"{name}: correspondence must map every vertex of shape 1")
        table.append((name, objective_from_rows(corr, mesh1, sample, rows2, solver)))
    return table

