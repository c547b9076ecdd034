"""CSV artifacts with a one-line JSON provenance header.

Every matrix file starts with ``# {json}`` followed by comma separated rows.
Floats are written with ``repr`` so reading a file back is exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .basis import GeodesicBasis
from .correspondence import Correspondence
from .descriptors import GeodesicDistanceDescriptor
from .lbo import LboBasis
from .matching import LandmarkSet


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(x):
    return repr(float(x))


def write_matrix(path, M, header=None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = ["# " + json.dumps(header or {}, sort_keys=True)]
    lines += [",".join(_fmt(x) for x in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def _data_lines(path):
    header = {}
    rows = []
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if no == 1:
                try:
                    header = json.loads(s[1:])
                except json.JSONDecodeError:
                    header = {}
            continue
        rows.append((no, s))
    return header, rows


def read_matrix(path):
    """Return ``(array, header)``; a non-numeric first data row is treated as column names."""
    header, rows = _data_lines(path)
    out = []
    for i, (no, s) in enumerate(rows):
        try:
            out.append([float(t) for t in s.split(",")])
        except ValueError:
            if i == 0:
                continue
            raise ValueError(f"{path}: line {no}: non-numeric entry") from None
    if out and len({len(r) for r in out}) != 1:
        raise ValueError(f"{path}: ragged rows")
    return np.array(out, dtype=float), header


# --------------------------------------------------------------- typed files


def write_basis(path, basis, provenance=None) -> None:
    """Write a geodesic or LBO basis; the two share one layout."""
    header = dict(provenance or {})
    if isinstance(basis, LboBasis):
        header.update(kind="lbo", eigenvalues=basis.frequencies.tolist(), mass=basis.mass.tolist())
        write_matrix(path, basis.Phi, header)
    else:
        header.update(kind="gdb", eigenvalues=basis.eigenvalues.tolist())
        write_matrix(path, basis.Q, header)


def read_basis(path):
    """Return ``(basis, header)`` where basis is a GeodesicBasis or LboBasis."""
    M, header = read_matrix(path)
    kind = header.get("kind")
    lam = np.array(header.get("eigenvalues", []), dtype=float)
    if M.shape[1] != len(lam):
        raise ValueError(f"{path}: {M.shape[1]} columns but {len(lam)} eigenvalues")
    if kind == "lbo":
        return LboBasis(M, lam, np.array(header["mass"], dtype=float)), header
    if kind == "gdb":
        return GeodesicBasis(M, lam), header
    raise ValueError(f"{path}: not a basis file (kind={kind!r})")


def write_gdd(path, gdd: GeodesicDistanceDescriptor, provenance=None) -> None:
    header = dict(provenance or {})
    header.update(kind="gdd", signature=gdd.signature.tolist(), eigenvalues=gdd.eigenvalues.tolist())
    write_matrix(path, gdd.X, header)


def read_gdd(path):
    M, header = read_matrix(path)
    if header.get("kind") != "gdd":
        raise ValueError(f"{path}: not a descriptor file")
    sig = np.array(header["signature"], dtype=float)
    lam = np.array(header["eigenvalues"], dtype=float)
    if M.shape[1] != len(sig):
        raise ValueError(f"{path}: {M.shape[1]} columns but {len(sig)} signature entries")
    return GeodesicDistanceDescriptor(M, sig, lam), header


def write_correspondence(path, corr: Correspondence, provenance=None) -> None:
    lines = ["# " + json.dumps(provenance or {}, sort_keys=True), "source,target"]
    lines += [f"{i},{j}" for i, j in enumerate(corr.map)]
    Path(path).write_text("\n".join(lines) + "\n")


def _index_pairs(path):
    _, rows = _data_lines(path)
    pairs = []
    for i, (no, s) in enumerate(rows):
        tok = s.replace(",", " ").split()
        try:
            a, b = int(tok[0]), int(tok[1])
        except (ValueError, IndexError):
            if i == 0:
                continue
            raise ValueError(f"{path}: line {no}: expected two integer indices") from None
        pairs.append((a, b))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def read_correspondence(path) -> Correspondence:
    """Two-column ``source,target`` file covering every source vertex exactly once."""
    pairs = _index_pairs(path)
    if len(pairs) == 0:
        raise ValueError(f"{path}: empty correspondence")
    src = pairs[:, 0]
    n = int(src.max()) + 1
    if len(src) != n or len(np.unique(src)) != n or src.min() < 0:
        raise ValueError(f"{path}: sources must be exactly 0..{n - 1}")
    m = np.empty(n, dtype=np.int64)
    m[src] = pairs[:, 1]
    return Correspondence(m)


def read_landmarks(path) -> LandmarkSet:
    return LandmarkSet(_index_pairs(path))


def write_landmarks(path, landmarks: LandmarkSet) -> None:
    Path(path).write_text("\n".join(f"{a},{b}" for a, b in landmarks.pairs) + "\n")


def read_descriptors(path) -> np.ndarray:
    """Plain numeric CSV, one row per vertex and one column per descriptor."""
    M, _ = read_matrix(path)
    return M
