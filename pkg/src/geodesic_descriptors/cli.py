"""Command-line entry point: ``gdd <subcommand> ...``.

Each subcommand reads the files the previous one writes, so
``basis -> gdd -> match -> eval`` run by hand produces the same bytes as
``pipeline``. Exit codes: 0 ok, 1 usage, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import math
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import io
from .basis import exact_basis, approximate_basis, make_probe, reconstruction_error_curve
from .descriptors import build_gdd
from .evaluation import distortion_curve, objective_table
from .exceptions import NumericalError
from .geodesics import SOLVERS, distance_matrix, farthest_point_sampling, geodesic_rows
from .lbo import LboBasis, build_laplacian, lbo_eigenbasis
from .matching import (
    DEFAULT_BLOCK,
    DEFAULT_K,
    MAX_ITERS,
    TOL,
    icp_match,
    init_from_correspondence,
    init_from_descriptors,
    init_from_landmarks,
    postprocess_lbo,
)
from .mesh import load_mesh

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@contextlib.contextmanager
def _atomic(path):
    """Yield a temporary sibling path that replaces ``path`` only on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent if str(path.parent) else ".")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _mesh(path):
    return load_mesh(path)


# ------------------------------------------------------------------- stages


def stage_geodesics(mesh_path, out, solver="fast_marching", sources=None, fps=None, seed_vertex=0,
                    symmetrize=False):
    mesh = _mesh(mesh_path)
    if (sources is None) == (fps is None):
        raise ValueError("give exactly one of a source list or an FPS sample count")
    if fps is not None:
        src = farthest_point_sampling(mesh, fps, seed_vertex, solver).indices
    else:
        src = np.asarray(sources, dtype=np.int64)
    rows = geodesic_rows(mesh, src, solver, symmetrize=symmetrize)
    header = {"kind": "geodesics", "mesh": mesh.content_hash(), "solver": solver,
              "sources": src.tolist(), "symmetrized": bool(symmetrize)}
    with _atomic(out) as tmp:
        io.write_matrix(tmp, rows, header)


def stage_basis(mesh_path, out, samples=100, k=DEFAULT_K, solver="fast_marching", seed_vertex=0, exact=False):
    mesh = _mesh(mesh_path)
    if exact:
        basis = exact_basis(distance_matrix(mesh, solver), k)
        method = "exact"
    else:
        basis = approximate_basis(mesh, samples, None, solver, seed_vertex)
        if k > basis.k:
            raise ValueError(f"k={k} exceeds the {basis.k} vectors available from p={samples} samples")
        basis = basis.truncated(k)
        method = "sampled"
    header = {"mesh": mesh.content_hash(), "method": method, "p": None if exact else samples,
              "k": k, "solver": solver, "seed_vertex": seed_vertex}
    with _atomic(out) as tmp:
        io.write_basis(tmp, basis, header)


def stage_lbo(mesh_path, out, k=DEFAULT_K):
    mesh = _mesh(mesh_path)
    basis = lbo_eigenbasis(build_laplacian(mesh), k)
    with _atomic(out) as tmp:
        io.write_basis(tmp, basis, {"mesh": mesh.content_hash(), "method": "lbo", "k": k})


def stage_gdd(basis_path, out, k=None):
    basis, header = io.read_basis(basis_path)
    if isinstance(basis, LboBasis):
        raise ValueError(f"{basis_path}: descriptors need a geodesic basis, not an LBO basis")
    gdd = build_gdd(basis)
    if k is not None:
        gdd = gdd.truncated(k)
    prov = {key: header[key] for key in ("mesh", "method", "p", "solver", "seed_vertex") if key in header}
    prov["k"] = gdd.k
    with _atomic(out) as tmp:
        io.write_gdd(tmp, gdd, prov)


def stage_match(gdd1_path, gdd2_path, out, init, init_files, k=DEFAULT_K, block=DEFAULT_BLOCK, penalty=None,
                max_iters=MAX_ITERS, tol=TOL, lbo_paths=None):
    """``init`` is one of ``landmarks``, ``corr``, ``descriptors``."""
    X1, h1 = io.read_gdd(gdd1_path)
    X2, h2 = io.read_gdd(gdd2_path)
    need = {"landmarks": 1, "corr": 1, "descriptors": 2}
    if init not in need:
        raise ValueError(f"unknown init mode {init!r}; expected one of {sorted(need)}")
    if len(init_files) != need[init]:
        raise ValueError(f"init mode {init} takes {need[init]} file(s), got {len(init_files)}")
    if init == "landmarks":
        alignment = init_from_landmarks(X1, X2, io.read_landmarks(init_files[0]), block, penalty, k)
    elif init == "corr":
        alignment = init_from_correspondence(io.read_correspondence(init_files[0]), X1, X2, k)
    else:
        d1, d2 = io.read_descriptors(init_files[0]), io.read_descriptors(init_files[1])
        alignment = init_from_descriptors(d1, d2, X1.to_basis(), X2.to_basis(), k)
    corr, _ = icp_match(X1, X2, alignment, max_iters, tol, k)
    if lbo_paths:
        phi1, _ = io.read_basis(lbo_paths[0])
        phi2, _ = io.read_basis(lbo_paths[1])
        if not (isinstance(phi1, LboBasis) and isinstance(phi2, LboBasis)):
            raise ValueError("post-processing needs two LBO basis files")
        corr = postprocess_lbo(corr, phi1, phi2, max_iters, tol)
    prov = {"mesh1": h1.get("mesh"), "mesh2": h2.get("mesh"), "init": init,
            "init_files": [io.file_hash(f) for f in init_files], "k": k, "block": block,
            "penalty": "default" if penalty is None else penalty, "max_iters": max_iters, "tol": tol,
            "post_lbo": bool(lbo_paths), "iterations": [len(h) for h in corr.history]}
    with _atomic(out) as tmp:
        io.write_correspondence(tmp, corr, prov)
    return corr


def _names(paths):
    names = [Path(p).stem for p in paths]
    if len(set(names)) != len(names):
        names = [str(p) for p in paths]
    return names


def stage_eval(corr_paths, mesh2_path, truth_path=None, curve_out=None, objective_out=None, mesh1_path=None,
               samples=1000, seed=0, solver="fast_marching"):
    if curve_out is None and objective_out is None:
        raise ValueError("nothing to do: give a curve output, an objective output, or both")
    mesh2 = _mesh(mesh2_path)
    corrs = dict(zip(_names(corr_paths), (io.read_correspondence(p) for p in corr_paths)))
    if curve_out is not None:
        if truth_path is None:
            raise ValueError("the distortion curve needs a ground-truth correspondence")
        truth = io.read_correspondence(truth_path)
        curves = {name: distortion_curve(c, truth, mesh2, solver=solver) for name, c in corrs.items()}
        cols = ["fraction"] if len(curves) == 1 else [f"fraction_{name}" for name in curves]
        lines = [",".join(["threshold"] + cols)]
        thresholds = next(iter(curves.values())).thresholds
        for i, t in enumerate(thresholds):
            lines.append(",".join([repr(float(t))] + [repr(float(c.fractions[i])) for c in curves.values()]))
        with _atomic(curve_out) as tmp:
            Path(tmp).write_text("\n".join(lines) + "\n")
    if objective_out is not None:
        if mesh1_path is None:
            raise ValueError("the objective needs the source mesh")
        mesh1 = _mesh(mesh1_path)
        table = objective_table(corrs, mesh1, mesh2, samples, seed, solver)
        lines = ["name,rms,raw_sq_sum"] + [f"{name},{obj.rms!r},{obj.raw_sq_sum!r}" for name, obj in table]
        with _atomic(objective_out) as tmp:
            Path(tmp).write_text("\n".join(lines) + "\n")


def stage_recon_curve(mesh_path, basis_paths, out, probes=20, seed=0, kmax=None, solver="fast_marching"):
    mesh = _mesh(mesh_path)
    bases = {}
    for name, path in zip(_names(basis_paths), basis_paths):
        bases[name], _ = io.read_basis(path)
    probe = make_probe(mesh, probes, seed, solver)
    curves = reconstruction_error_curve(mesh, bases, probe, kmax)
    K = max(len(c) for c in curves.values())
    lines = [",".join(["k"] + list(curves))]
    for k in range(K):
        vals = [repr(float(c[k])) if k < len(c) else "" for c in curves.values()]
        lines.append(",".join([str(k + 1)] + vals))
    with _atomic(out) as tmp:
        Path(tmp).write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------- pipeline


@dataclasses.dataclass
class PipelineConfig:
    """Flat configuration; every field round-trips through ``key = value`` text."""

    mesh1: str = ""
    mesh2: str = ""
    out_dir: str = "gdd_out"
    samples: int = 100
    k: int = DEFAULT_K
    solver: str = "fast_marching"
    seed_vertex: int = 0
    init: str = "landmarks"
    init_file: str = ""
    init_file2: str = ""
    block: int = DEFAULT_BLOCK
    penalty: str = "default"
    max_iters: int = MAX_ITERS
    tol: float = TOL
    post_lbo: bool = False
    lbo_k: int = DEFAULT_K
    truth: str = ""
    eval_samples: int = 1000
    eval_seed: int = 0
    threads: int = 1

    @classmethod
    def from_mapping(cls, values: dict) -> PipelineConfig:
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in fields:
                raise ValueError(f"unknown config key {key!r}")
            kind = type(fields[key].default)
            raw = str(raw).strip()
            if kind is bool:
                if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"config key {key}: expected a boolean, got {raw!r}")
                kwargs[key] = raw.lower() in ("true", "1", "yes")
            else:
                try:
                    kwargs[key] = kind(raw)
                except ValueError:
                    raise ValueError(f"config key {key}: cannot parse {raw!r} as {kind.__name__}") from None
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self):
        if not self.mesh1 or not self.mesh2:
            raise ValueError("config needs both mesh1 and mesh2")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.init not in ("landmarks", "corr", "descriptors"):
            raise ValueError(f"unknown init mode {self.init!r}")
        if not self.init_file or (self.init == "descriptors" and not self.init_file2):
            raise ValueError(f"init mode {self.init} needs its input file(s)")
        if self.k > math.ceil(self.samples / 2):
            raise ValueError(f"k={self.k} exceeds ceil(samples / 2) = {math.ceil(self.samples / 2)}")
        if self.penalty != "default":
            float(self.penalty)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k} = {str(v).lower() if isinstance(v, bool) else v}\n" for k, v in self.as_dict().items())


def read_config(path) -> dict:
    values = {}
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ValueError(f"{path}: line {no}: expected key = value")
        key, val = (t.strip() for t in s.split("=", 1))
        values[key] = val
    return values


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage into a scratch directory and move the results into ``out_dir``.

    Returns the manifest. On failure nothing is written to ``out_dir``.
    """
    os.environ["GDD_THREADS"] = str(cfg.threads)
    out_dir = Path(cfg.out_dir)
    parent = out_dir.resolve().parent
    parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".gdd-", dir=parent))
    times = {}
    penalty = None if cfg.penalty == "default" else float(cfg.penalty)
    init_files = [cfg.init_file] + ([cfg.init_file2] if cfg.init == "descriptors" else [])
    inputs = {"mesh1": cfg.mesh1, "mesh2": cfg.mesh2}
    inputs.update({f"init_file{i + 1}": f for i, f in enumerate(init_files)})
    if cfg.truth:
        inputs["truth"] = cfg.truth

    def timed(name, fn, *args, **kw):
        t0 = time.perf_counter()
        with _stage(name):
            fn(*args, **kw)
        times[name] = round(time.perf_counter() - t0, 6)

    try:
        with _stage("inputs"):
            for path in inputs.values():
                if not Path(path).is_file():
                    raise FileNotFoundError(f"input file not found: {path}")
            hashes = {key: io.file_hash(path) for key, path in inputs.items()}
        s = scratch
        for i, mesh in (("1", cfg.mesh1), ("2", cfg.mesh2)):
            timed(f"basis{i}", stage_basis, mesh, s / f"basis{i}.csv", cfg.samples, cfg.k, cfg.solver,
                  cfg.seed_vertex)
            timed(f"gdd{i}", stage_gdd, s / f"basis{i}.csv", s / f"gdd{i}.csv")
            if cfg.post_lbo:
                timed(f"lbo{i}", stage_lbo, mesh, s / f"lbo{i}.csv", cfg.lbo_k)
        lbo = [s / "lbo1.csv", s / "lbo2.csv"] if cfg.post_lbo else None
        timed("match", stage_match, s / "gdd1.csv", s / "gdd2.csv", s / "correspondence.csv", cfg.init,
              init_files, cfg.k, cfg.block, penalty, cfg.max_iters, cfg.tol, lbo)
        n2 = load_mesh(cfg.mesh2).n_vertices
        samples = min(cfg.eval_samples, n2)
        if cfg.truth or samples > 0:
            timed("eval", stage_eval, [s / "correspondence.csv"], cfg.mesh2, cfg.truth or None,
                  s / "curve.csv" if cfg.truth else None, s / "objective.csv" if samples > 0 else None,
                  cfg.mesh1, samples, cfg.eval_seed, cfg.solver)
        outputs = sorted(p.name for p in scratch.iterdir())
        manifest = {"config": cfg.as_dict(), "inputs": hashes, "stage_seconds": times,
                    "objective_samples": samples, "outputs": outputs}
        (scratch / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        (scratch / "config.txt").write_text(cfg.to_text())
        out_dir.mkdir(parents=True, exist_ok=True)
        for p in sorted(scratch.iterdir()):
            os.replace(p, out_dir / p.name)
        return manifest
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gdd", description="Geodesic distance descriptors for shape correspondence.")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for geodesic rows (default: $GDD_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("geodesics", help="distance rows from chosen sources")
    p.add_argument("mesh")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--solver", choices=SOLVERS, default="fast_marching")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sources", type=_int_list)
    g.add_argument("--fps", type=int, metavar="P")
    p.add_argument("--seed-vertex", type=int, default=0)
    p.add_argument("--symmetrize", action="store_true", help="average entries between sources")

    p = sub.add_parser("basis", help="geodesic distance basis")
    p.add_argument("mesh")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--solver", choices=SOLVERS, default="fast_marching")
    p.add_argument("--seed-vertex", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="eigendecompose the full distance matrix")

    p = sub.add_parser("lbo", help="Laplace-Beltrami eigenbasis")
    p.add_argument("mesh")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)

    p = sub.add_parser("gdd", help="descriptors from a geodesic basis")
    p.add_argument("basis")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("match", help="ICP correspondence between two descriptor files")
    p.add_argument("gdd1")
    p.add_argument("gdd2")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--init", nargs="+", required=True, metavar="MODE_OR_FILE",
                   help="landmarks FILE | corr FILE | descriptors FILE1 FILE2")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--block", type=int, default=DEFAULT_BLOCK)
    p.add_argument("--penalty", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=MAX_ITERS)
    p.add_argument("--tol", type=float, default=TOL)
    p.add_argument("--post-lbo", nargs=2, metavar=("LBO1", "LBO2"))

    p = sub.add_parser("eval", help="distortion curve and sampled objective")
    p.add_argument("--corr", nargs="+", required=True)
    p.add_argument("--mesh2", required=True)
    p.add_argument("--truth")
    p.add_argument("--curve-out")
    p.add_argument("--objective", action="store_true")
    p.add_argument("--objective-out")
    p.add_argument("--mesh1")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=SOLVERS, default="fast_marching")

    p = sub.add_parser("recon-curve", help="reconstruction error versus basis size")
    p.add_argument("mesh")
    p.add_argument("bases", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--probes", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--solver", choices=SOLVERS, default="fast_marching")

    p = sub.add_parser("pipeline", help="basis, descriptors, matching and evaluation in one run")
    p.add_argument("--config", help="flat key = value file; flags below override it")
    for f in dataclasses.fields(PipelineConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, metavar=f.name.upper())
    return parser


def _dispatch(args):
    cmd = args.command
    if cmd == "geodesics":
        stage_geodesics(args.mesh, args.out, args.solver, args.sources, args.fps, args.seed_vertex, args.symmetrize)
    elif cmd == "basis":
        stage_basis(args.mesh, args.out, args.samples, args.k, args.solver, args.seed_vertex, args.exact)
    elif cmd == "lbo":
        stage_lbo(args.mesh, args.out, args.k)
    elif cmd == "gdd":
        stage_gdd(args.basis, args.out, args.k)
    elif cmd == "match":
        stage_match(args.gdd1, args.gdd2, args.out, args.init[0], args.init[1:], args.k, args.block,
                    args.penalty, args.max_iters, args.tol, args.post_lbo)
    elif cmd == "eval":
        if args.objective and not args.objective_out:
            raise ValueError("--objective needs --objective-out")
        stage_eval(args.corr, args.mesh2, args.truth, args.curve_out,
                   args.objective_out if args.objective or args.objective_out else None,
                   args.mesh1, args.samples, args.seed, args.solver)
    elif cmd == "recon-curve":
        stage_recon_curve(args.mesh, args.bases, args.out, args.probes, args.seed, args.kmax, args.solver)
    elif cmd == "pipeline":
        values = read_config(args.config) if args.config else {}
        values.update({f.name: getattr(args, f.name) for f in dataclasses.fields(PipelineConfig)
                       if getattr(args, f.name) is not None})
        if args.threads is not None:
            values["threads"] = args.threads
        with _stage("config"):
            cfg = PipelineConfig.from_mapping(values)
        run_pipeline(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        if args.threads < 1:
            print("gdd: error: --threads must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["GDD_THREADS"] = str(args.threads)
    try:
        with _stage(args.command):
            _dispatch(args)
    except StageError as exc:
        cause = exc.cause
        if isinstance(cause, NumericalError):
            code = EXIT_NUMERICAL
        elif isinstance(cause, (OSError, ValueError, LookupError)):
            code = EXIT_INPUT
        else:
            raise
        print(f"gdd: error in {exc.stage}: {cause}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
