"""Point-to-point maps between two meshes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Correspondence:
    """Map from every vertex of shape 1 to a vertex of shape 2.

    The map need not be bijective. ``residuals`` are descriptor-space
    distances at convergence when the map comes from matching, and
    ``history`` the per-iteration mean squared residual.
    """

    map: np.ndarray
    residuals: np.ndarray | None = None
    history: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64)
        if m.ndim != 1:
            raise ValueError("correspondence map must be one-dimensional")
        if len(m) and m.min() < 0:
            raise ValueError("correspondence targets must be non-negative")
        object.__setattr__(self, "map", m)
        if self.residuals is not None:
            r = np.asarray(self.residuals, dtype=float)
            if r.shape != m.shape or (r < 0).any():
                raise ValueError("residuals must be non-negative and match the map")
            object.__setattr__(self, "residuals", r)

    def __len__(self):
        return len(self.map)

    @classmethod
    def identity(cls, n) -> Correspondence:
        return cls(np.arange(n))

    def check_target(self, n2) -> None:
        if len(self.map) and self.map.max() >= n2:
            raise ValueError(f"correspondence target {int(self.map.max())} outside [0, {n2})")

    @property
    def max_residual(self) -> float:
        """Largest row residual, the 2-infinity norm of the matched difference."""
        return float(self.residuals.max()) if self.residuals is not None else float("nan")

    @property
    def rms_residual(self) -> float:
        return float(np.sqrt(np.mean(self.residuals**2))) if self.residuals is not None else float("nan")

    def accuracy(self, truth) -> float:
        """Fraction of vertices mapped exactly as in ``truth``."""
        truth = truth.map if isinstance(truth, Correspondence) else np.asarray(truth)
        return float(np.mean(self.map == truth))
