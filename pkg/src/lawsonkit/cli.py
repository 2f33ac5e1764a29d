"""Command-line interface.

Subcommands cover the pipeline stages: `tessellate` and `groups` emit the
combinatorial data as JSON, `disc` runs the minimizer and writes a lossless
mesh checkpoint, `assemble` welds the closed surface and reports its
topology, `verify` runs the property suite with a machine-readable report,
`export` writes viewable OBJ output, and `report` prints a human summary.

Exit codes: 0 on success with all checks passing, 1 when a verification
check fails, 2 for usage or configuration errors. All JSON artifacts are
deterministic for a fixed config and seed; none of them contain timings.

A config file (`--config FILE`) holds `key=value` lines using the flag
names without the leading dashes (`m=3`, `tol-grad=1e-10`); explicit flags
win over file values.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import objio, plateau, surface
from .groups import build_named_groups
from .lattice import Lattice
from .suite import ConfigError, RunConfig, RunContext, run_suite

FLAG_KEYS = ("m", "k", "level", "tol_grad", "tol_sym", "out", "seed",
             "suite", "format")

DEFAULTS = {"m": 3, "k": 2, "level": 5, "tol_grad": 1e-10, "tol_sym": 1e-10,
            "out": ".", "seed": 0, "suite": "all", "format": "obj"}

_CASTS = {"m": int, "k": int, "level": int, "seed": int,
          "tol_grad": float, "tol_sym": float}


def read_config_file(path: str) -> dict:
    """Parse a key=value config file. Unknown keys are usage errors."""
    values = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in FLAG_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        try:
            values[key] = _CASTS.get(key, str)(value)
        except ValueError:
            raise ConfigError(f"{path}:{ln}: bad value for {key}: {value!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lawsonkit",
        description="Tessellations of the three-sphere and minimal surfaces "
                    "assembled from numerically minimized discs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
            ("tessellate", "write the lattice description as JSON"),
            ("groups", "write the symmetry groups and their order table"),
            ("disc", "minimize the fundamental disc; write checkpoint and report"),
            ("assemble", "build the closed surface; write checkpoint and topology"),
            ("verify", "run the verification suite; exit 1 on any failure"),
            ("export", "write the assembled surface for viewing"),
            ("report", "print a human-readable verification summary")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--level", type=int, default=None)
        p.add_argument("--tol-grad", type=float, default=None, dest="tol_grad")
        p.add_argument("--tol-sym", type=float, default=None, dest="tol_sym")
        p.add_argument("--out", type=str, default=None, metavar="DIR")
        p.add_argument("--seed", type=int, default=None, metavar="N")
        p.add_argument("--suite", type=str, default=None, metavar="NAME",
                       help="check group or single check name; default all")
        p.add_argument("--format", type=str, default=None,
                       choices=("obj", "json"))
        p.add_argument("--config", type=str, default=None, metavar="FILE",
                       help="key=value file; explicit flags win")
    return parser


def merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config is not None:
        settings.update(read_config_file(args.config))
    for key in FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    return settings


def make_config(settings: dict) -> RunConfig:
    return RunConfig(m=settings["m"], k=settings["k"],
                     level=settings["level"],
                     tol_grad=settings["tol_grad"],
                     tol_sym=settings["tol_sym"],
                     out_dir=settings["out"],
                     seed=settings["seed"]).validate()


def _outpath(settings, name):
    os.makedirs(settings["out"], exist_ok=True)
    return os.path.join(settings["out"], name)


def _stem(cfg: RunConfig, with_level=True) -> str:
    base = f"m{cfg.m}k{cfg.k}"
    return f"{base}_l{cfg.level}" if with_level else base


def cmd_tessellate(cfg: RunConfig, settings: dict) -> int:
    lat = Lattice(cfg.m, cfg.k)
    path = _outpath(settings, f"lattice_{_stem(cfg, with_level=False)}.json")
    objio.dump_json(lat.to_json_dict(), path)
    n_int = len(lat.cells("int"))
    n_half = len(lat.cells("half"))
    print(f"lattice ({cfg.m},{cfg.k}): {n_int} integer cells, "
          f"{n_half} half cells -> {path}")
    return 0


def cmd_groups(cfg: RunConfig, settings: dict) -> int:
    lat = Lattice(cfg.m, cfg.k)
    ng = build_named_groups(lat)
    table = {g.name: g.order for g in ng.all_named()}
    doc = {"m": cfg.m, "k": cfg.k, "orders": table,
           "groups": {g.name: g.to_json_dict() for g in ng.all_named()}}
    path = _outpath(settings, f"groups_{_stem(cfg, with_level=False)}.json")
    objio.dump_json(doc, path)
    width = max(len(n) for n in table)
    for name in table:
        print(f"{name:<{width}}  {table[name]:4d}")
    print(f"-> {path}")
    return 0


def cmd_disc(cfg: RunConfig, settings: dict) -> int:
    ctx = RunContext(cfg)
    mesh, rep = ctx.disc_out[cfg.level]
    stem = _stem(cfg)
    obj_path = _outpath(settings, f"disc_{stem}.obj")
    objio.write_obj_4d(obj_path, mesh.verts, mesh.tris, mesh.boundary_mask)
    rep_path = _outpath(settings, f"disc_report_{stem}.json")
    objio.dump_json({lv: r.to_json_dict() for lv, (_, r) in
                     sorted(ctx.disc_out.items())}, rep_path)
    print(f"disc ({cfg.m},{cfg.k}) level {cfg.level}: "
          f"area {rep.area_spherical:.9f}, residual {rep.max_residual:.3e}, "
          f"{'converged' if rep.converged else 'NOT CONVERGED'} "
          f"in {rep.iterations} iterations")
    print(f"-> {obj_path}")
    print(f"-> {rep_path}")
    return 0 if rep.converged else 1


def cmd_assemble(cfg: RunConfig, settings: dict) -> int:
    ctx = RunContext(cfg)
    surf = ctx.surf
    top = ctx.surf_topology
    stem = _stem(cfg)
    obj_path = _outpath(settings, f"surface_{stem}.obj")
    objio.write_obj_4d(obj_path, surf.verts, surf.tris)
    top_path = _outpath(settings, f"topology_{stem}.json")
    objio.dump_json({"surface": surf.to_json_dict(),
                     "topology": top.to_json_dict()}, top_path)
    print(f"surface ({cfg.m},{cfg.k}) level {cfg.level}: "
          f"genus {top.genus}, chi {top.euler_characteristic}, "
          f"{surf.n_verts} vertices, {surf.n_tris} triangles")
    print(f"-> {obj_path}")
    print(f"-> {top_path}")
    ok = top.closed and top.connected and top.orientable
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig, settings: dict) -> int:
    rep = run_suite(cfg, only=settings["suite"])
    path = _outpath(settings, f"verify_{_stem(cfg)}.json")
    objio.dump_json(rep.to_json_dict(), path)
    _print_results(rep)
    print(f"-> {path}")
    return 0 if rep.ok else 1


def cmd_report(cfg: RunConfig, settings: dict) -> int:
    rep = run_suite(cfg, only=settings["suite"])
    print(f"configuration: m={cfg.m} k={cfg.k} level={cfg.level} "
          f"seed={cfg.seed}")
    _print_results(rep, verbose=True)
    counts = rep.counts()
    print(f"{counts['pass']} passed, {counts['fail']} failed, "
          f"{counts['skip']} skipped")
    return 0 if rep.ok else 1


def _print_results(rep, verbose=False):
    width = max(len(r.name) for r in rep.results)
    for r in rep.results:
        mark = {"pass": "ok  ", "fail": "FAIL", "skip": "skip"}[r.status]
        line = f"{mark} {r.name:<{width}}"
        if r.residual is not None:
            line += f"  {r.residual:.3e}"
        if r.status == "skip":
            line += f"  ({r.reason})"
        elif verbose and r.witness:
            line += f"  {r.witness}"
        elif r.status == "fail" and r.witness:
            line += f"  {r.witness}"
        print(line)


def cmd_export(cfg: RunConfig, settings: dict) -> int:
    ctx = RunContext(cfg)
    surf = ctx.surf
    stem = _stem(cfg)
    if settings["format"] == "obj":
        path = _outpath(settings, f"surface3d_{stem}.obj")
        objio.write_obj_stereo(path, surf.verts, surf.tris,
                               objio.default_pole(ctx.lattice))
    else:
        path = _outpath(settings, f"surface_{stem}.mesh.json")
        objio.dump_json(surf.to_json_dict() | {
            "vertices": surf.verts, "triangles": surf.tris}, path)
    print(f"-> {path}")
    return 0


COMMANDS = {
    "tessellate": cmd_tessellate,
    "groups": cmd_groups,
    "disc": cmd_disc,
    "assemble": cmd_assemble,
    "verify": cmd_verify,
    "export": cmd_export,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = merge_settings(args)
        cfg = make_config(settings)
        return COMMANDS[args.command](cfg, settings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
