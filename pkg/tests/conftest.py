import numpy as np
import pytest

from geodesic_descriptors import approximate_basis, build_gdd, distance_matrix
from geodesic_descriptors.matching import random_block_orthogonal, random_eigen_ambiguity
from geodesic_descriptors.shapes import bumpy_sphere, grid_mesh


@pytest.fixture(scope="session")
def grid10():
    return grid_mesh(10)


@pytest.fixture(scope="session")
def small_sphere():
    """162 vertices; dense distance work stays cheap."""
    return bumpy_sphere(2)


@pytest.fixture(scope="session")
def small_D(small_sphere):
    return distance_matrix(small_sphere)


@pytest.fixture(scope="session")
def sphere():
    return bumpy_sphere(3)


@pytest.fixture(scope="session")
def sphere_D(sphere):
    return distance_matrix(sphere)


@pytest.fixture(scope="session")
def sphere_gdd(sphere):
    return build_gdd(approximate_basis(sphere, p=100))


class SelfMatch:
    """Shape 2 is a vertex-permuted copy of shape 1 with descriptor columns mixed by C0.

    ``truth.map[i] = perm[i]`` and ``X2[perm] = X1 @ C0``. By default C0 is an
    eigendecomposition ambiguity (signs, rotations among near-equal
    eigenvalues); ``haar=True`` draws it from the whole signature-block group.
    """

    def __init__(self, mesh, gdd, seed, haar=False):
        from geodesic_descriptors import Correspondence, GeodesicDistanceDescriptor

        rng = np.random.default_rng(seed)
        n = gdd.n
        self.mesh1 = mesh
        self.perm = rng.permutation(n)
        self.mesh2 = mesh.permuted(self.perm)
        if haar:
            self.C0 = random_block_orthogonal(gdd.signature, rng)
        else:
            self.C0 = random_eigen_ambiguity(gdd.eigenvalues, rng)
        X2 = np.empty_like(gdd.X)
        X2[self.perm] = gdd.X @ self.C0
        self.X1 = gdd
        self.X2 = GeodesicDistanceDescriptor(X2, gdd.signature.copy(), gdd.eigenvalues.copy())
        self.truth = Correspondence(self.perm)
        self.rng = rng

    def landmarks(self, m=5):
        from geodesic_descriptors import LandmarkSet

        src = self.rng.choice(self.X1.n, size=m, replace=False)
        return LandmarkSet(np.stack([src, self.perm[src]], axis=1))


@pytest.fixture(scope="session")
def self_match(sphere, sphere_gdd):
    cache = {}

    def make(seed=0):
        if seed not in cache:
            cache[seed] = SelfMatch(sphere, sphere_gdd, seed)
        return cache[seed]

    return make


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    line = f"criterion {number:>2}: {status}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
