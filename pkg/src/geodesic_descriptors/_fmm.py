"""Fast marching on triangulated surfaces (compiled kernel + per-mesh tables).

Acute corners use the planar-wavefront triangle update. An obtuse corner is
split in two by a virtual vertex, found by unfolding the neighbouring faces
into the plane of the obtuse triangle until a vertex lands inside the
sector where both halves are acute.
"""

import heapq
import weakref

import numba
import numpy as np

_MAX_UNFOLD = 30

_tables = weakref.WeakKeyDictionary()


class MarchingTables:
    """Per-mesh geometry needed by the marching kernel."""

    def __init__(self, mesh):
        v = mesh.vertices
        f = np.ascontiguousarray(mesh.faces)
        m = len(f)
        n = len(v)
        len_ca = np.empty((m, 3))
        len_cb = np.empty((m, 3))
        cos_c = np.empty((m, 3))
        for c in range(3):
            C, A, B = v[f[:, c]], v[f[:, (c + 1) % 3]], v[f[:, (c + 2) % 3]]
            ca, cb = A - C, B - C
            len_ca[:, c] = np.linalg.norm(ca, axis=1)
            len_cb[:, c] = np.linalg.norm(cb, axis=1)
            cos_c[:, c] = np.einsum("ij,ij->i", ca, cb) / (len_ca[:, c] * len_cb[:, c])
        np.clip(cos_c, -1.0, 1.0, out=cos_c)

        order = np.argsort(f.ravel(), kind="stable")
        self.vf_idx = (order // 3).astype(np.int64)
        self.vf_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(f.ravel(), minlength=n), out=self.vf_ptr[1:])

        virt = -np.ones((m, 3), dtype=np.int64)
        len_cv = np.zeros((m, 3))
        cos1 = np.zeros((m, 3))
        cos2 = np.zeros((m, 3))
        obtuse = np.argwhere(cos_c < -1e-12)
        if len(obtuse):
            edge_faces = _edge_faces(f)
            for fi, c in obtuse:
                found = _unfold(v, f, edge_faces, fi, c, len_ca[fi, c], len_cb[fi, c], cos_c[fi, c])
                if found is not None:
                    virt[fi, c], len_cv[fi, c], cos1[fi, c], cos2[fi, c] = found

        used = virt.ravel() >= 0
        slots = np.flatnonzero(used)
        targets = virt.ravel()[used]
        order = np.argsort(targets, kind="stable")
        self.vr_idx = slots[order].astype(np.int64)
        self.vr_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(targets, minlength=n), out=self.vr_ptr[1:])

        self.n = n
        self.faces = f
        self.len_ca, self.len_cb, self.cos_c = len_ca, len_cb, cos_c
        self.virt, self.len_cv, self.cos1, self.cos2 = virt, len_cv, cos1, cos2
        self.n_obtuse = len(obtuse)
        self.n_unfolded = int(used.sum())

    def march(self, source):
        return _march(
            np.int64(source), self.n, self.faces, self.len_ca, self.len_cb, self.cos_c,
            self.vf_ptr, self.vf_idx, self.virt, self.len_cv, self.cos1, self.cos2,
            self.vr_ptr, self.vr_idx,
        )


def tables_for(mesh) -> MarchingTables:
    tab = _tables.get(mesh)
    if tab is None:
        tab = MarchingTables(mesh)
        _tables[mesh] = tab
    return tab


def _edge_faces(f):
    out = {}
    for fi, (a, b, c) in enumerate(f):
        for e in ((a, b), (b, c), (c, a)):
            out.setdefault((min(e), max(e)), []).append(fi)
    return out


def _place(p1, p2, l1, l2, away_from):
    """2-D point at distances l1, l2 from p1, p2, on the side opposite ``away_from``."""
    d = p2 - p1
    L = np.hypot(*d)
    x = (l1 * l1 - l2 * l2 + L * L) / (2 * L)
    y = np.sqrt(max(l1 * l1 - x * x, 0.0))
    ex = d / L
    ey = np.array([-ex[1], ex[0]])
    side = np.dot(away_from - p1, ey)
    return p1 + x * ex - np.sign(side if side != 0 else 1.0) * y * ey


def _unfold(v, f, edge_faces, fi, c, b_len, a_len, cos_t):
    """Search for a virtual vertex splitting the obtuse corner ``c`` of face ``fi``."""
    C = f[fi, c]
    p = {int(f[fi, (c + 1) % 3]): np.array([b_len, 0.0])}
    theta = np.arccos(cos_t)
    p[int(f[fi, (c + 2) % 3])] = a_len * np.array([cos_t, np.sin(theta)])
    away = np.zeros(2)
    lo, hi = theta - np.pi / 2, np.pi / 2
    i1, i2 = int(f[fi, (c + 1) % 3]), int(f[fi, (c + 2) % 3])
    prev = fi
    for _ in range(_MAX_UNFOLD):
        nbrs = [g for g in edge_faces[(min(i1, i2), max(i1, i2))] if g != prev]
        if len(nbrs) != 1:
            return None
        g = nbrs[0]
        d = int(next(x for x in f[g] if x != i1 and x != i2))
        if d == C:
            return None
        l1 = np.linalg.norm(v[d] - v[i1])
        l2 = np.linalg.norm(v[d] - v[i2])
        pd = _place(p[i1], p[i2], l1, l2, away)
        phi = np.arctan2(pd[1], pd[0])
        if lo <= phi <= hi:
            r = np.hypot(*pd)
            return d, r, np.cos(phi), np.cos(theta - phi)
        p[d] = pd
        if phi > hi:
            away, i2 = p[i2], d
        else:
            away, i1 = p[i1], d
        prev = g
    return None


@numba.njit(cache=True, nogil=True)
def _triangle_update(ta, tb, b, a, cos_t):
    """Arrival time at C from known times at A (distance b) and B (distance a)."""
    if tb < ta:
        ta, tb = tb, ta
        a, b = b, a
    best = min(ta + b, tb + a)
    u = tb - ta
    sin2 = 1.0 - cos_t * cos_t
    qa = a * a + b * b - 2.0 * a * b * cos_t
    qb = 2.0 * b * u * (a * cos_t - b)
    qc = b * b * (u * u - a * a * sin2)
    disc = qb * qb - 4.0 * qa * qc
    if qa > 0.0 and disc >= 0.0:
        t = (-qb + np.sqrt(disc)) / (2.0 * qa)
        if u < t:
            r = b * (t - u) / t
            upper = a / cos_t if cos_t > 1e-12 else np.inf
            if a * cos_t < r < upper:
                best = min(best, ta + t)
    return best


@numba.njit(cache=True, nogil=True)
def _corner_value(fi, c, T, alive, faces, len_ca, len_cb, cos_c, virt, len_cv, cos1, cos2):
    A = faces[fi, (c + 1) % 3]
    B = faces[fi, (c + 2) % 3]
    best = np.inf
    b = len_ca[fi, c]
    a = len_cb[fi, c]
    if alive[A]:
        best = min(best, T[A] + b)
    if alive[B]:
        best = min(best, T[B] + a)
    V = virt[fi, c]
    if V < 0:
        if alive[A] and alive[B] and cos_c[fi, c] >= -1e-12:
            best = min(best, _triangle_update(T[A], T[B], b, a, cos_c[fi, c]))
    elif alive[V]:
        cv = len_cv[fi, c]
        if alive[A]:
            best = min(best, _triangle_update(T[A], T[V], b, cv, cos1[fi, c]))
        if alive[B]:
            best = min(best, _triangle_update(T[V], T[B], cv, a, cos2[fi, c]))
    return best


@numba.njit(cache=True, nogil=True)
def _march(source, n, faces, len_ca, len_cb, cos_c, vf_ptr, vf_idx,
           virt, len_cv, cos1, cos2, vr_ptr, vr_idx):
    T = np.full(n, np.inf)
    alive = np.zeros(n, dtype=np.bool_)
    T[source] = 0.0
    heap = [(0.0, source)]
    while len(heap) > 0:
        t, v = heapq.heappop(heap)
        if alive[v] or t > T[v]:
            continue
        alive[v] = True
        for q in range(vf_ptr[v], vf_ptr[v + 1]):
            fi = vf_idx[q]
            for c in range(3):
                C = faces[fi, c]
                if alive[C]:
                    continue
                val = _corner_value(fi, c, T, alive, faces, len_ca, len_cb, cos_c,
                                    virt, len_cv, cos1, cos2)
                if val < T[C]:
                    T[C] = val
                    heapq.heappush(heap, (val, C))
        for q in range(vr_ptr[v], vr_ptr[v + 1]):
            slot = vr_idx[q]
            fi = slot // 3
            c = slot % 3
            C = faces[fi, c]
            if alive[C]:
                continue
            val = _corner_value(fi, c, T, alive, faces, len_ca, len_cb, cos_c,
                                virt, len_cv, cos1, cos2)
            if val < T[C]:
                T[C] = val
                heapq.heappush(heap, (val, C))
    return T
