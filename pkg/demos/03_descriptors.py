"""Per-vertex descriptors that encode all pairwise geodesic distances.

X = Q sqrt(|Lambda|) with a +/-1 column signature J, so X J X^T ~ D. The
descriptor is defined only up to a signature-block orthogonal C, and is
unchanged by rigid motions of the shape.
"""

import numpy as np
from scipy.stats import spearmanr, special_ortho_group

from geodesic_descriptors import approximate_basis, build_gdd, descriptor_distance, distance_matrix
from geodesic_descriptors.matching import random_block_orthogonal
from geodesic_descriptors.shapes import bumpy_sphere

mesh = bumpy_sphere(3)
gdd = build_gdd(approximate_basis(mesh, p=100))
D = distance_matrix(mesh)
print(f"{gdd.n} vertices, {gdd.k} columns, signature: {int((gdd.signature > 0).sum())} positive")

err = np.abs(gdd.reconstruct() - D)
print(f"X J X^T against D: mean abs error {err.mean():.4f}, mean distance {D.mean():.3f}")

rng = np.random.default_rng(0)
i, j = rng.integers(0, gdd.n, (2, 2000))
E = np.array([descriptor_distance(gdd, a, b) for a, b in zip(i, j)])
print(f"rank correlation of descriptor distance with geodesic distance: {spearmanr(E, D[i, j]).statistic:.3f}")

C = random_block_orthogonal(gdd.signature, 1)
rotated = gdd.rotated(C)
change = max(abs(descriptor_distance(rotated, a, b) - descriptor_distance(gdd, a, b)) for a, b in zip(i[:200], j[:200]))
print(f"largest change of descriptor distance under a block rotation: {change:.1e}")

moved = mesh.transformed(special_ortho_group.rvs(3, random_state=2), [1.0, 2.0, 3.0])
g2 = build_gdd(approximate_basis(moved, p=100))
np.testing.assert_allclose(np.abs(g2.X), np.abs(gdd.X), atol=1e-6)
print("rigid motion: descriptors agree up to column signs")
