"""Triangle meshes: validation, file I/O and basic geometric quantities."""

from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .exceptions import MeshParseError, MeshValidationError

logger = logging.getLogger(__name__)

FORMATS = ("off", "ply", "obj")

# relative to the squared bounding-box diagonal
_MIN_FACE_AREA = 1e-12


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Immutable triangle mesh.

    Parameters
    ----------
    vertices : (n, 3) array of float
        Vertex coordinates.
    faces : (m, 3) array of int
        Zero-based vertex indices of each triangle.
    validate : bool
        Check the structural invariants on construction. Disable only for
        inputs that are known to be valid.
    """

    vertices: np.ndarray
    faces: np.ndarray
    validate: bool = True

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        f = np.array(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshValidationError(f"vertices must have shape (n, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshValidationError(f"faces must have shape (m, 3), got {f.shape}")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if self.validate:
            _validate(v, f)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def face_areas(self) -> np.ndarray:
        v, f = self.vertices, self.faces
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def total_area(self) -> float:
        return float(self.face_areas().sum())

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (e, 2) array with ``i < j``."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric edge-length adjacency matrix."""
        e = self.edges()
        w = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        n = self.n_vertices
        a = sparse.coo_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n))
        return (a + a.T).tocsr()

    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    def transformed(self, rotation=None, translation=None, scale=1.0) -> TriangleMesh:
        """Return a copy with vertices mapped by ``scale * R x + t``."""
        v = self.vertices * scale
        if rotation is not None:
            v = v @ np.asarray(rotation).T
        if translation is not None:
            v = v + np.asarray(translation)
        return TriangleMesh(v, self.faces, validate=False)

    def permuted(self, perm) -> TriangleMesh:
        """Reorder vertices so that new vertex ``perm[i]`` is old vertex ``i``.

        Faces are rewritten to keep the same geometry.
        """
        perm = np.asarray(perm)
        v = np.empty_like(self.vertices)
        v[perm] = self.vertices
        return TriangleMesh(v, perm[self.faces], validate=False)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.faces).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class VertexWeights:
    """Per-vertex area weights (the lumped mass of each vertex)."""

    areas: np.ndarray

    @property
    def total(self) -> float:
        return float(self.areas.sum())


def _validate(v, f):
    n = v.shape[0]
    if n == 0 or f.shape[0] == 0:
        raise MeshValidationError("mesh must have at least one vertex and one face")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v).all(1))[0])
        raise MeshValidationError(f"vertex {bad} has non-finite coordinates")
    out = (f < 0) | (f >= n)
    if out.any():
        bad = int(np.flatnonzero(out.any(1))[0])
        raise MeshValidationError(f"face {bad} has vertex index outside [0, {n})")
    rep = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    if rep.any():
        raise MeshValidationError(f"face {int(np.flatnonzero(rep)[0])} repeats a vertex index")
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    area = 0.5 * np.linalg.norm(cross, axis=1)
    diag = np.linalg.norm(v.max(0) - v.min(0))
    tiny = area <= _MIN_FACE_AREA * diag**2
    if tiny.any():
        raise MeshValidationError(f"face {int(np.flatnonzero(tiny)[0])} is degenerate (area {area[tiny][0]:.3g})")
    used = np.zeros(n, dtype=bool)
    used[f.ravel()] = True
    if not used.all():
        raise MeshValidationError(f"vertex {int(np.flatnonzero(~used)[0])} is not referenced by any face")
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    graph = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    if n_comp > 1:
        bad = int(np.flatnonzero(labels != labels[0])[0])
        raise MeshValidationError(f"mesh has {n_comp} connected components (vertex {bad} is not connected to vertex 0)")
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    if (counts > 2).any():
        warnings.warn(f"mesh has {int((counts > 2).sum())} non-manifold edges", stacklevel=3)


def vertex_areas(mesh: TriangleMesh) -> VertexWeights:
    """Barycentric area lumping: each face gives a third of its area to each corner."""
    third = mesh.face_areas() / 3.0
    areas = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(areas, mesh.faces[:, c], third)
    return VertexWeights(areas)


# ---------------------------------------------------------------- file I/O


def _format_of(path, fmt):
    if fmt is None:
        fmt = Path(path).suffix.lstrip(".")
    fmt = fmt.lower().replace("-ascii", "")
    if fmt not in FORMATS:
        raise MeshParseError(f"unsupported mesh format {fmt!r}; expected one of {FORMATS}")
    return fmt


def load_mesh(path, format=None) -> TriangleMesh:
    """Read a triangle mesh from an OFF, ASCII PLY or OBJ file.

    The format is taken from the file suffix unless given explicitly.
    Vertex order is preserved exactly as stored in the file.
    """
    fmt = _format_of(path, format)
    path = Path(path)
    if fmt == "ply":
        with open(path, "rb") as fh:
            head = fh.read(512)
        if b"format binary" in head:
            raise MeshParseError(f"{path}: binary PLY is not supported, convert to ASCII")
    text = path.read_text()
    reader = {"off": _parse_off, "ply": _parse_ply, "obj": _parse_obj}[fmt]
    v, f = reader(text, path)
    try:
        return TriangleMesh(v, f)
    except MeshValidationError as exc:
        raise MeshValidationError(f"{path}: {exc}") from None


def _content_lines(text):
    """Yield (line_number, tokens) for non-empty, non-comment lines."""
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _looks_like_face(tok):
    return tok[0].isdigit() and len(tok) == int(tok[0]) + 1 and all(t.lstrip("-").isdigit() for t in tok)


def _parse_off(text, path):
    lines = list(_content_lines(text))
    if not lines or lines[0][1][0] != "OFF":
        raise MeshParseError(f"{path}: line 1: missing OFF header")
    rest = lines[0][1][1:]
    pos = 1
    if not rest:
        if len(lines) < 2:
            raise MeshParseError(f"{path}: missing element counts")
        rest = lines[1][1]
        pos = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise MeshParseError(f"{path}: malformed element counts {' '.join(rest)!r}") from None
    body = lines[pos:]
    if len(body) < nv + nf:
        # tell a missing vertex from a missing face by where the face lines start
        n_vert = next((i for i, (_, tok) in enumerate(body) if _looks_like_face(tok)), len(body))
        if n_vert < nv:
            raise MeshParseError(f"{path}: header declares {nv} vertices but only {n_vert} vertex lines follow")
    if len(body) < nv:
        raise MeshParseError(f"{path}: header declares {nv} vertices but only {len(body)} vertex lines follow")
    v = []
    for no, tok in body[:nv]:
        try:
            v.append([float(t) for t in tok[:3]])
        except ValueError:
            raise MeshParseError(f"{path}: line {no}: malformed vertex") from None
        if len(tok) < 3:
            raise MeshParseError(f"{path}: line {no}: vertex needs 3 coordinates")
    body = body[nv:]
    if len(body) < nf:
        raise MeshParseError(f"{path}: header declares {nf} faces but only {len(body)} face lines follow")
    f = []
    for idx, (no, tok) in enumerate(body[:nf]):
        try:
            ids = [int(t) for t in tok]
        except ValueError:
            raise MeshParseError(f"{path}: line {no}: malformed face {idx}") from None
        if ids[0] != 3 or len(ids) < 4:
            raise MeshParseError(f"{path}: line {no}: face {idx} is not a triangle")
        f.append(ids[1:4])
    return np.array(v, dtype=float).reshape(-1, 3), np.array(f, dtype=np.int64).reshape(-1, 3)


def _parse_obj(text, path):
    v, f = [], []
    for no, tok in _content_lines(text):
        if tok[0] == "v":
            try:
                v.append([float(t) for t in tok[1:4]])
            except ValueError:
                raise MeshParseError(f"{path}: line {no}: malformed vertex") from None
            if len(v[-1]) != 3:
                raise MeshParseError(f"{path}: line {no}: vertex needs 3 coordinates")
        elif tok[0] == "f":
            if len(tok) != 4:
                raise MeshParseError(f"{path}: line {no}: face {len(f)} is not a triangle")
            try:
                ids = [int(t.split("/")[0]) for t in tok[1:]]
            except ValueError:
                raise MeshParseError(f"{path}: line {no}: malformed face {len(f)}") from None
            # negative indices are relative to the current end of the vertex list
            f.append([i - 1 if i > 0 else len(v) + i for i in ids])
    if not v:
        raise MeshParseError(f"{path}: no vertices found")
    return np.array(v, dtype=float), np.array(f, dtype=np.int64).reshape(-1, 3)


def _parse_ply(text, path):
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshParseError(f"{path}: line 1: missing ply magic")
    nv = nf = None
    vprops = []
    current = None
    end = None
    for no, raw in enumerate(lines[1:], 2):
        tok = raw.split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise MeshParseError(f"{path}: line {no}: only ascii PLY is supported")
        elif tok[0] == "element":
            current = tok[1]
            if current == "vertex":
                nv = int(tok[2])
            elif current == "face":
                nf = int(tok[2])
        elif tok[0] == "property" and current == "vertex":
            vprops.append(tok[-1])
        elif tok[0] == "end_header":
            end = no
            break
    if end is None or nv is None or nf is None:
        raise MeshParseError(f"{path}: incomplete PLY header")
    try:
        cols = [vprops.index(c) for c in "xyz"]
    except ValueError:
        raise MeshParseError(f"{path}: vertex element lacks x/y/z properties") from None
    body = [(no, ln.split()) for no, ln in enumerate(lines[end:], end + 1) if ln.strip()]
    if len(body) < nv:
        raise MeshParseError(f"{path}: header declares {nv} vertices but only {len(body)} vertex lines follow")
    v = []
    for no, tok in body[:nv]:
        try:
            v.append([float(tok[c]) for c in cols])
        except (ValueError, IndexError):
            raise MeshParseError(f"{path}: line {no}: malformed vertex") from None
    body = body[nv:]
    if len(body) < nf:
        raise MeshParseError(f"{path}: header declares {nf} faces but only {len(body)} face lines follow")
    f = []
    for idx, (no, tok) in enumerate(body[:nf]):
        try:
            ids = [int(t) for t in tok]
        except ValueError:
            raise MeshParseError(f"{path}: line {no}: malformed face {idx}") from None
        if ids[0] != 3 or len(ids) < 4:
            raise MeshParseError(f"{path}: line {no}: face {idx} is not a triangle")
        f.append(ids[1:4])
    return np.array(v, dtype=float).reshape(-1, 3), np.array(f, dtype=np.int64).reshape(-1, 3)


def write_mesh(mesh: TriangleMesh, path, format=None) -> None:
    """Write a mesh as OFF, ASCII PLY or OBJ with round-trip exact floats."""
    fmt = _format_of(path, format)
    vs = "\n".join(" ".join(repr(float(c)) for c in row) for row in mesh.vertices)
    n, m = mesh.n_vertices, mesh.n_faces
    if fmt == "off":
        fs = "\n".join(f"3 {a} {b} {c}" for a, b, c in mesh.faces)
        out = f"OFF\n{n} {m} 0\n{vs}\n{fs}\n"
    elif fmt == "obj":
        vs = "\n".join("v " + " ".join(repr(float(c)) for c in row) for row in mesh.vertices)
        fs = "\n".join(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces)
        out = f"{vs}\n{fs}\n"
    else:
        fs = "\n".join(f"3 {a} {b} {c}" for a, b, c in mesh.faces)
        header = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {n}\nproperty double x\nproperty double y\nproperty double z\n"
            f"element face {m}\nproperty list uchar int vertex_indices\nend_header\n"
        )
        out = f"{header}{vs}\n{fs}\n"
    Path(path).write_text(out)
