"""Descriptor matching by iterative closest point with Procrustes alignment.

The unknowns are a vertex map ``P`` and an alignment ``C`` with
``P X1 C ~ X2``. ``C`` is orthogonal within the positive-signature
columns and within the negative-signature columns, and zero between the
two groups, which keeps ``X C diag(J) C^T X^T = X diag(J) X^T``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .basis import GeodesicBasis
from .correspondence import Correspondence
from .descriptors import GeodesicDistanceDescriptor, build_gdd
from .geodesics import default_workers
from .lbo import LboBasis

MAX_ITERS = 100
TOL = 1e-6
DEFAULT_K = 50
DEFAULT_BLOCK = 20


@dataclass(frozen=True, eq=False)
class Alignment:
    """Signature-block orthogonal matrix ``C``.

    ``active`` is the number of leading columns that were actually
    estimated (the rest is identity); ``None`` means all of them.
    """

    C: np.ndarray
    signature: np.ndarray
    active: int | None = None

    @property
    def k(self) -> int:
        return self.C.shape[0]

    def is_block_orthogonal(self, tol=1e-8) -> bool:
        C, s = self.C, self.signature
        cross = s[:, None] != s[None, :]
        return bool(np.allclose(C.T @ C, np.eye(len(s)), atol=tol) and np.all(np.abs(C[cross]) <= tol))


@dataclass(frozen=True)
class LandmarkSet:
    """Pairs of corresponding vertex indices (shape 1, shape 2)."""

    pairs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if len(p) == 0:
            raise ValueError("at least one landmark pair is required")
        if len(np.unique(p, axis=0)) != len(p):
            raise ValueError("landmark pairs must be distinct")
        if p.min() < 0:
            raise ValueError("landmark indices must be non-negative")
        object.__setattr__(self, "pairs", p)

    @property
    def source(self):
        return self.pairs[:, 0]

    @property
    def target(self):
        return self.pairs[:, 1]


# ------------------------------------------------------------- primitives


def _blocks(signature):
    signature = np.asarray(signature)
    return [np.flatnonzero(signature > 0), np.flatnonzero(signature < 0)]


def _polar(M):
    U, _, Vt = np.linalg.svd(M)
    return U @ Vt


def procrustes(A, B, signature) -> Alignment:
    """Block-orthogonal ``C`` minimizing ``||A C - B||_F``.

    Each signature block is solved independently by the SVD solution
    ``C = U V^T`` of ``A_b^T B_b = U S V^T``.
    """
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    signature = np.asarray(signature, dtype=float)
    C = np.zeros((A.shape[1], A.shape[1]))
    for b in _blocks(signature):
        if len(b):
            C[np.ix_(b, b)] = _polar(A[:, b].T @ B[:, b])
    return Alignment(C, signature)


def random_block_orthogonal(signature, rng=None) -> np.ndarray:
    """Haar-random orthogonal matrix within each signature block."""
    from scipy.stats import ortho_group

    rng = np.random.default_rng(rng)
    signature = np.asarray(signature)
    C = np.zeros((len(signature), len(signature)))
    for b in _blocks(signature):
        if len(b) == 1:
            C[b[0], b[0]] = rng.choice([-1.0, 1.0])
        elif len(b):
            C[np.ix_(b, b)] = ortho_group.rvs(len(b), random_state=rng)
    return C


def eigen_groups(eigenvalues, gap=0.05) -> list:
    """Runs of same-sign columns whose consecutive |lambda| differ by at most ``gap`` relative."""
    lam = np.asarray(eigenvalues, dtype=float)
    groups = []
    for s in (1, -1):
        idx = np.flatnonzero(np.sign(lam) == s)
        idx = idx[np.argsort(-np.abs(lam[idx]), kind="stable")]
        run = []
        for c in idx:
            if run and abs(abs(lam[run[-1]]) - abs(lam[c])) > gap * abs(lam[run[-1]]):
                groups.append(run)
                run = []
            run.append(int(c))
        if run:
            groups.append(run)
    return sorted(groups)


def random_eigen_ambiguity(eigenvalues, rng=None, gap=0.05) -> np.ndarray:
    """Column ambiguity an independent eigendecomposition can produce.

    Random signs on isolated eigenvalues and Haar rotations within groups of
    near-equal ones (see :func:`eigen_groups`). Such a ``C`` is
    block-orthogonal and (nearly) commutes with ``sqrt(|Lambda|)``.
    """
    from scipy.stats import ortho_group

    rng = np.random.default_rng(rng)
    k = len(eigenvalues)
    C = np.zeros((k, k))
    for g in eigen_groups(eigenvalues, gap):
        if len(g) == 1:
            C[g[0], g[0]] = rng.choice([-1.0, 1.0])
        else:
            C[np.ix_(g, g)] = ortho_group.rvs(len(g), random_state=rng)
    return C


def shared_columns(sig1, sig2, k=None):
    """Pair columns of two descriptors with possibly different signatures.

    The i-th positive column of one shape is paired with the i-th positive
    column of the other (likewise for negative columns), up to the smaller
    count of each sign. Pairs are ordered by their column position in
    shape 1 and truncated to ``k``.

    Returns ``(cols1, cols2, signature)``.
    """
    sig1, sig2 = np.asarray(sig1), np.asarray(sig2)
    pairs = []
    for s in (1, -1):
        c1, c2 = np.flatnonzero(sig1 == s), np.flatnonzero(sig2 == s)
        m = min(len(c1), len(c2))
        pairs += list(zip(c1[:m], c2[:m]))
    pairs.sort()
    if k is not None:
        pairs = pairs[:k]
    if not pairs:
        raise ValueError("descriptors share no columns")
    cols1 = np.array([p[0] for p in pairs])
    cols2 = np.array([p[1] for p in pairs])
    return cols1, cols2, sig1[cols1].astype(float)


def _nearest(tree, points, workers):
    """Exact nearest neighbours with ties resolved to the lowest index."""
    if tree.n == 1:
        d, i = tree.query(points, k=1, workers=workers)
        return d, i
    d, i = tree.query(points, k=2, workers=workers)
    tie = d[:, 1] <= d[:, 0]
    best = np.where(tie, np.minimum(i[:, 0], i[:, 1]), i[:, 0])
    return d[:, 0], best


def _icp(A, B, signature, C=None, map0=None, max_iters=MAX_ITERS, tol=TOL):
    """Alternate nearest-neighbour assignment and Procrustes alignment.

    Stops when the relative improvement of the mean squared residual drops
    below ``tol`` or after ``max_iters`` assignments.
    """
    workers = default_workers()
    tree = cKDTree(B)
    if map0 is not None:
        C = procrustes(A, B[map0], signature).C
    history = []
    for _ in range(max_iters):
        dist, idx = _nearest(tree, A @ C, workers)
        msr = float(np.mean(dist**2))
        history.append(msr)
        if len(history) > 1 and history[-2] - msr <= tol * history[-2]:
            break
        C = procrustes(A, B[idx], signature).C
    return idx, dist, C, tuple(history)


# ------------------------------------------------------------------ ICP


def _columns(X1, X2, k):
    cols1, cols2, sig = shared_columns(X1.signature, X2.signature, k)
    return X1.X[:, cols1], X2.X[:, cols2], sig


def icp_match(X1: GeodesicDistanceDescriptor, X2: GeodesicDistanceDescriptor, init,
              max_iters=MAX_ITERS, tol=TOL, k=DEFAULT_K):
    """Match descriptor rows of shape 1 to shape 2.

    ``init`` is an :class:`Alignment` or a :class:`Correspondence`. An
    alignment estimated on only its first ``active`` columns first runs ICP
    on those columns; the resulting map then seeds ICP on all ``k`` columns.

    Returns ``(Correspondence, Alignment)``. The correspondence carries the
    final residuals and one mean-squared-residual trace per stage.
    """
    A, B, sig = _columns(X1, X2, k)
    kk = A.shape[1]
    histories = []
    if isinstance(init, Correspondence):
        if len(init) != A.shape[0]:
            raise ValueError("initial correspondence must cover every vertex of shape 1")
        init.check_target(B.shape[0])
        map0 = init.map
    elif isinstance(init, Alignment):
        C0 = init.C
        if C0.shape[0] > kk:
            raise ValueError(f"alignment of size {C0.shape[0]} exceeds the {kk} shared columns")
        if not np.array_equal(init.signature, sig[: C0.shape[0]]):
            raise ValueError("alignment signature does not match the shared descriptor columns")
        active = init.active if init.active is not None else C0.shape[0]
        if active < kk:
            a = active
            map0, _, _, h = _icp(A[:, :a], B[:, :a], sig[:a], C=C0[:a, :a], max_iters=max_iters, tol=tol)
            histories.append(h)
        else:
            map0 = None
            C_full = C0
    else:
        raise TypeError("init must be an Alignment or a Correspondence")
    if map0 is not None:
        idx, dist, C, h = _icp(A, B, sig, map0=map0, max_iters=max_iters, tol=tol)
    else:
        idx, dist, C, h = _icp(A, B, sig, C=C_full, max_iters=max_iters, tol=tol)
    histories.append(h)
    return Correspondence(idx, dist, tuple(histories)), Alignment(C, sig)


def init_from_correspondence(corr: Correspondence, X1, X2, k=DEFAULT_K) -> Alignment:
    """Procrustes alignment over all matched row pairs of a given map."""
    A, B, sig = _columns(X1, X2, k)
    if len(corr) != A.shape[0]:
        raise ValueError("correspondence must cover every vertex of shape 1")
    corr.check_target(B.shape[0])
    return procrustes(A, B[corr.map], sig)


def _signed_columns(basis: GeodesicBasis):
    g = build_gdd(basis)
    return g, g.X / np.sqrt(np.abs(g.eigenvalues))


def init_from_descriptors(desc1, desc2, basis1: GeodesicBasis, basis2: GeodesicBasis, k=DEFAULT_K) -> Alignment:
    """Alignment from corresponding descriptor functions on both shapes.

    With coefficients ``F = Q^T f`` and ``W = sqrt(|Lambda|)``, solves
    ``F1^T W1 C = F2^T W2`` in the least-squares sense and projects the
    solution onto the nearest signature-block orthogonal matrix.
    """
    desc1 = np.asarray(desc1, dtype=float).reshape(basis1.n, -1)
    desc2 = np.asarray(desc2, dtype=float).reshape(basis2.n, -1)
    if desc1.shape[1] != desc2.shape[1]:
        raise ValueError("descriptor counts differ between the shapes")
    g1, Q1 = _signed_columns(basis1)
    g2, Q2 = _signed_columns(basis2)
    cols1, cols2, sig = shared_columns(g1.signature, g2.signature, k)
    W1 = np.sqrt(np.abs(g1.eigenvalues[cols1]))
    W2 = np.sqrt(np.abs(g2.eigenvalues[cols2]))
    lhs = (Q1[:, cols1].T @ desc1).T * W1
    rhs = (Q2[:, cols2].T @ desc2).T * W2
    d, kk = lhs.shape
    if d < kk:
        warnings.warn(f"{d} descriptors for {kk} unknown columns: least-norm solution", stacklevel=2)
    C_ls = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    C = np.zeros((kk, kk))
    for b in _blocks(sig):
        if len(b):
            C[np.ix_(b, b)] = _polar(C_ls[np.ix_(b, b)])
    return Alignment(C, sig)


def _penalized_block(G, mu, max_iters=500, tol=1e-13):
    """Orthogonal ``C`` maximizing ``tr(C^T G) + mu/2 * sum_a C_aa^2``.

    On orthogonal matrices the off-diagonal penalty equals a constant minus
    ``sum_a C_aa^2``. Each step maximizes a linear minorant by a polar
    decomposition, so the objective never decreases.
    """
    d = np.sign(np.diag(G))
    d[d == 0] = 1.0
    C = np.diag(d)
    if mu == 0:
        return _polar(G)
    for _ in range(max_iters):
        C_new = _polar(G + mu * np.diag(np.diag(C)))
        if np.abs(C_new - C).max() < tol:
            return C_new
        C = C_new
    return C


def init_from_landmarks(X1, X2, landmarks: LandmarkSet, block=DEFAULT_BLOCK, penalty=None, k=DEFAULT_K) -> Alignment:
    """Estimate the leading ``block`` x ``block`` part of ``C`` from landmark rows.

    Minimizes ``||X1_hat C_b - X2_hat||_F^2 + penalty * sum_{a != b} C_b[a, b]^2``
    over block-orthogonal ``C_b``, where the hats denote landmark rows and
    the first ``block`` shared columns. The default penalty is a tenth of
    the mean squared landmark row norm. Columns past ``block`` get identity.
    """
    A, B, sig = _columns(X1, X2, k)
    kk = A.shape[1]
    if not 1 <= block <= kk:
        raise ValueError(f"block={block} must lie in [1, {kk}]")
    n1, n2 = A.shape[0], B.shape[0]
    if landmarks.source.max() >= n1 or landmarks.target.max() >= n2:
        raise IndexError("landmark index outside the shapes")
    Ah = A[landmarks.source, :block]
    Bh = B[landmarks.target, :block]
    mu = 0.1 * float(np.mean(np.sum(Ah**2, axis=1))) if penalty is None else float(penalty)
    C = np.eye(kk)
    Cb = np.zeros((block, block))
    for b in _blocks(sig[:block]):
        if len(b):
            Cb[np.ix_(b, b)] = _penalized_block(Ah[:, b].T @ Bh[:, b], mu)
    C[:block, :block] = Cb
    return Alignment(C, sig, active=block)


def match_landmarks(X1, X2, landmarks, k=DEFAULT_K, block=DEFAULT_BLOCK, penalty=None,
                    max_iters=MAX_ITERS, tol=TOL):
    """Landmark initialization followed by ICP; the common five-point workflow."""
    init = init_from_landmarks(X1, X2, landmarks, block, penalty, k)
    return icp_match(X1, X2, init, max_iters, tol, k)


def postprocess_lbo(corr: Correspondence, phi1: LboBasis, phi2: LboBasis,
                    max_iters=MAX_ITERS, tol=TOL, k=None) -> Correspondence:
    """Refine a map by ICP on Laplace-Beltrami eigenfunction rows."""
    kk = min(phi1.k, phi2.k) if k is None else min(k, phi1.k, phi2.k)
    A, B = phi1.Phi[:, :kk], phi2.Phi[:, :kk]
    if len(corr) != A.shape[0]:
        raise ValueError("correspondence must cover every vertex of shape 1")
    corr.check_target(B.shape[0])
    idx, dist, _, h = _icp(A, B, np.ones(kk), map0=corr.map, max_iters=max_iters, tol=tol)
    return Correspondence(idx, dist, (h,))
