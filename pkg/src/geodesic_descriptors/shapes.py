"""Synthetic meshes for tests, demos and desk-scale experiments."""

import numpy as np

from .mesh import TriangleMesh


def grid_mesh(nx, ny=None, width=1.0, height=1.0) -> TriangleMesh:
    """Regular ``nx`` by ``ny`` vertex grid over a rectangle.

    Each cell is split along its (0,0)-(1,1) diagonal, so a 10x10 grid
    has 100 vertices and 162 triangles. Vertex ``i + nx * j`` sits at
    ``(i * dx, j * dy)``.
    """
    ny = nx if ny is None else ny
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    X, Y = np.meshgrid(xs, ys)
    v = np.column_stack([X.ravel(), Y.ravel(), np.zeros(nx * ny)])
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
    a = (i + nx * j).ravel()
    b, c, d = a + 1, a + nx + 1, a + nx
    f = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return TriangleMesh(v, f)


def tetrahedron(edge=1.0) -> TriangleMesh:
    """Regular tetrahedron with the given edge length."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    v *= edge / (2 * np.sqrt(2))
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return TriangleMesh(v, f)


def equilateral_triangle(side=1.0) -> TriangleMesh:
    v = np.array([[0, 0, 0], [side, 0, 0], [side / 2, side * np.sqrt(3) / 2, 0]])
    return TriangleMesh(v, [[0, 1, 2]])


def icosphere(subdivisions=3, radius=1.0) -> TriangleMesh:
    """Unit icosahedron refined by midpoint subdivision and projected to the sphere.

    Vertex counts are 12, 42, 162, 642, 2562 for 0..4 subdivisions.
    """
    t = (1 + np.sqrt(5)) / 2
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    v = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = v[a] + v[b]
                v.append(m / np.linalg.norm(m))
                cache[key] = len(v) - 1
            return cache[key]

        new = []
        for a, b, c in f:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        f = new
    return TriangleMesh(np.array(v) * radius, np.array(f))


def bumpy_sphere(subdivisions=3, seed=0, amplitude=0.15, axes=(1.0, 0.75, 0.55)) -> TriangleMesh:
    """Ellipsoid with a smooth random radial perturbation.

    The perturbation is a sum of a few random low-frequency cosines, which
    breaks every symmetry of the sphere. Useful as a generic shape whose
    distance matrix has a simple (non-repeating) spectrum.
    """
    rng = np.random.default_rng(seed)
    base = icosphere(subdivisions)
    u = base.vertices
    bump = np.zeros(len(u))
    for _ in range(6):
        direction = rng.normal(size=3)
        freq = rng.uniform(1.0, 3.0)
        phase = rng.uniform(0, 2 * np.pi)
        bump += np.cos(freq * u @ direction + phase)
    bump /= np.abs(bump).max()
    v = u * (1 + amplitude * bump)[:, None] * np.asarray(axes)
    return TriangleMesh(v, base.faces)
