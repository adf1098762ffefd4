"""Command line front end.

Exit codes: 0 success, 2 usage or parse error, 3 semantic error,
4 not admissible, 5 quadrature failure, 6 invalid move site,
7 infeasible positivity.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import angles as ang
from . import codec, pachner, state, wgz
from .errors import SemanticError, TqftError
from .mesh import boundary_split, homology_h2_truncated, vertex_links
from .qdilog import QDilogParams, log_phi
from .quadrature import QuadConfig

CORPUS = {"fig8": "chi41", "five2": "chi52"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    path: str | None
    b: float | None
    hbar: float | None
    grid: tuple[float, ...]
    tol: float
    fmt: str
    out: str | None
    seed: int

    def params(self, default_hbar: float | None = None) -> QDilogParams:
        if self.b is not None and self.hbar is not None:
            raise SemanticError("give at most one of --b and --hbar")
        if self.b is not None:
            return QDilogParams(self.b)
        if self.hbar is not None:
            return QDilogParams.from_hbar(self.hbar)
        return QDilogParams.from_hbar(default_hbar) if default_hbar else QDilogParams(1.0)


def _read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SemanticError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--b", type=float)
    common.add_argument("--hbar", type=float)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--grid", type=str, default=",".join(map(str, state.DEFAULT_HBAR_GRID)))
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=str)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", type=str, help="file of 'key = value' defaults; flags win")

    p = argparse.ArgumentParser(prog="teichtqft", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("info", parents=[common])
    s.add_argument("path")

    s = sub.add_parser("compute", parents=[common])
    s.add_argument("what", choices=("volume", "partition", "chi41", "chi52", "sweep", "volfit"))
    s.add_argument("path", nargs="?")
    s.add_argument("--x", type=float, default=0.0)
    s.add_argument("--kind", choices=("chi41", "chi52"))

    for name in ("pachner", "transform"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("path")
        s.add_argument("--move", choices=("23", "32"), required=True)
        s.add_argument("--edge", type=int)
        s.add_argument("--face", type=int, nargs=2, metavar=("TET", "FACE"))
        s.add_argument("--diff", type=str, help="write the JSON diff here instead of stdout")

    s = sub.add_parser("qdilog", parents=[common])
    s.add_argument("--z", required=True)

    s = sub.add_parser("wgz", parents=[common])
    s.add_argument("--a", type=float, default=0.125)
    s.add_argument("--c", type=float, default=0.125)
    s.add_argument("--M", type=int, default=wgz.DEFAULT_M)
    s.add_argument("--n", type=int, default=16, help="grid points per side")
    return p


def _parse_args(argv):
    p = _parser()
    args = p.parse_args(argv)
    if args.config:
        conf = _read_config(args.config)
        known = {a.dest for a in p._actions} | {a.dest for sp in p._subparsers._group_actions
                                                 for c in sp.choices.values() for a in c._actions}
        unknown = set(conf) - known
        if unknown:
            raise SemanticError(f"unknown config keys: {sorted(unknown)}")
        # re-parse with config values as defaults so explicit flags still win
        for sp in p._subparsers._group_actions:
            for c in sp.choices.values():
                c.set_defaults(**conf)
        p.set_defaults(**conf)
        args = p.parse_args(argv)
        for a in ("b", "hbar", "tol"):
            if isinstance(getattr(args, a, None), str):
                setattr(args, a, float(getattr(args, a)))
    return args


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise SemanticError(f"cannot read {text!r} as a complex number") from None


def _emit(cfg: RunConfig, payload) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path):
    if path is None:
        raise SemanticError("an input file is required")
    try:
        return codec.load(path)
    except OSError as e:
        raise SemanticError(f"cannot read {path}: {e.strerror}") from None


def _shape(tri) -> ang.ShapeAssignment:
    return ang.shape_of(tri) if tri.angles is not None else ang.rational_shape(tri)


def _identify(tri) -> str | None:
    """Name of the bundled complex that ``tri`` equals up to tetrahedron order."""
    from importlib import resources
    for name in CORPUS:
        ref = codec.parse((resources.files("teichtqft") / "data" / f"{name}.tri").read_text())
        if ref.n != tri.n:
            continue
        for perm in itertools.permutations(range(tri.n)):
            r = ref.relabel(perm)
            if r.signs == tri.signs and r.gluings == tri.gluings:
                return name
    return None


def _kind(args, tri) -> str:
    if args.kind:
        return args.kind
    name = _identify(tri)
    if name is None:
        raise SemanticError("cannot tell which knot integral belongs to this file; pass --kind")
    return CORPUS[name]


# ---------------------------------------------------------------------------


def cmd_info(cfg: RunConfig) -> dict:
    tri = _load(cfg.path)
    cells = tri.cells
    links = vertex_links(tri)
    kinds = sorted({l.kind for l in links})
    h2 = homology_h2_truncated(tri)
    plus, minus = boundary_split(tri)
    try:
        bdim = ang.balanced_space_dim(tri)
    except SemanticError:
        bdim = None
    try:
        ang.solve_shape(tri)
        positive = True
    except SemanticError:
        positive = False
    return {
        "tets": tri.n, "edges": cells.num_edges, "vertices": cells.num_vertices,
        "valences": list(cells.valences), "internal_edges": list(tri.internal_edges()),
        "boundary": {"plus": [list(s) for s in plus], "minus": [list(s) for s in minus]},
        "link": kinds[0] if len(kinds) == 1 else kinds,
        "links": [{"vertex": l.vertex_class, "kind": l.kind, "euler": l.euler_characteristic,
                   "orientable": l.orientable} for l in links],
        "h2_rank": h2.rank, "h2_torsion": list(h2.torsion),
        "admissible": bool(h2.is_admissible_topology and positive),
        "positive_angle_structure": positive, "balanced_dim": bdim,
    }


def _sweep_rows(kind, grid, x):
    return state.sweep(kind, grid, x)


def rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hbar", "re", "im", "abs", "log_abs", "rate"])
    for r in rows:
        w.writerow([repr(r.hbar), repr(r.value.real), repr(r.value.imag), repr(abs(r.value)),
                    repr(r.log_abs), repr(r.rate)])
    return buf.getvalue()


def cmd_compute(cfg: RunConfig, args):
    what = args.what
    qcfg = QuadConfig(tol=cfg.tol)
    if what == "volume":
        return ang.maximize_volume(_load(cfg.path)).as_dict()
    if what == "partition":
        tri = _load(cfg.path)
        p = cfg.params(default_hbar=0.25)
        res = state.partition_function(tri, _shape(tri), p, qcfg)
        return res.as_dict()
    if what in ("chi41", "chi52"):
        p = cfg.params(default_hbar=0.25)
        fn = state.chi_41 if what == "chi41" else state.chi_52
        r = fn(args.x, p)
        return {"kind": what, "hbar": p.hbar, "b": p.b, "x": args.x,
                "z": {"re": r.value.real, "im": r.value.imag}, "abs": abs(r.value),
                "error_estimate": r.error}
    kind = args.kind if cfg.path is None and args.kind else _kind(args, _load(cfg.path))
    rows = _sweep_rows(kind, cfg.grid, args.x)
    if what == "sweep":
        if cfg.fmt == "csv":
            return rows_csv(rows)
        return {"kind": kind, "rows": [{"hbar": r.hbar, "re": r.value.real, "im": r.value.imag,
                                        "abs": abs(r.value), "log_abs": r.log_abs,
                                        "rate": r.rate, "error_estimate": r.error} for r in rows]}
    fit = state.fit_volume_rate([(r.hbar, abs(r.value)) for r in rows])
    out = fit.as_dict()
    out["kind"] = kind
    if cfg.path is not None:
        target = ang.maximize_volume(_load(cfg.path)).volume
        out["target_volume"] = target
        out["deviation"] = abs(fit.volume - target) / target
    return out


def cmd_transform(cfg: RunConfig, args) -> dict:
    tri = _load(cfg.path)
    sh = _shape(tri)
    if args.move == "32":
        if args.edge is None:
            raise SemanticError("--move 32 needs --edge")
        res = pachner.apply_32(tri, sh, args.edge)
    else:
        if args.face is None:
            raise SemanticError("--move 23 needs --face TET FACE")
        res = pachner.apply_23(tri, sh, *args.face)
    new = res.tri.with_angles(res.shape.angles)
    text = codec.serialize(new)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    diff = res.diff()
    if args.diff:
        Path(args.diff).write_text(json.dumps(diff, indent=2, sort_keys=True) + "\n")
    elif cfg.out:
        sys.stdout.write(json.dumps(diff, indent=2, sort_keys=True) + "\n")
    return diff


def cmd_qdilog(cfg: RunConfig, args) -> dict:
    p = cfg.params()
    z = _complex(args.z)
    v = complex(np.exp(log_phi(z, p)))
    return {"b": p.b, "z": {"re": z.real, "im": z.imag}, "re": v.real, "im": v.imag}


def cmd_wgz(cfg: RunConfig, args) -> str:
    p = cfg.params()
    g = wgz.g_section(wgz.PsiParams(args.a, args.c, p.b), args.M)
    u, vals = g.grid(args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "abs"])
    for i, j in itertools.product(range(args.n), repeat=2):
        w.writerow([repr(float(u[i])), repr(float(u[j])), repr(float(abs(vals[i, j])))])
    return buf.getvalue()


def run(argv=None) -> int:
    try:
        args = _parse_args(argv)
        grid = tuple(float(v) for v in str(args.grid).split(",") if v.strip())
        cfg = RunConfig(args.command, getattr(args, "path", None), args.b, args.hbar, grid,
                        float(args.tol), args.fmt, args.out, int(args.seed))
        np.random.seed(cfg.seed)
        if cfg.command == "info":
            _emit(cfg, cmd_info(cfg))
        elif cfg.command == "compute":
            _emit(cfg, cmd_compute(cfg, args))
        elif cfg.command in ("pachner", "transform"):
            cmd_transform(cfg, args)
        elif cfg.command == "qdilog":
            _emit(cfg, cmd_qdilog(cfg, args))
        elif cfg.command == "wgz":
            _emit(cfg, cmd_wgz(cfg, args))
        return 0
    except TqftError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return 3


def main() -> None:
    sys.exit(run())
