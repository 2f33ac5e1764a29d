"""Flat-file I/O: Wavefront OBJ meshes, sidecar JSON, deterministic dumps.

Two OBJ flavors are written. Checkpoints keep the raw four-dimensional
vertices: each `v x y z` line carries the first three coordinates and is
preceded by a comment line `# w4 <value>` holding the fourth, so the file
still opens in any OBJ viewer while remaining lossless together with its
sidecar. Exports for viewing project vertices stereographically to R^3 from
a configurable pole instead.

Every JSON file is written with sorted keys and fixed separators so that
identical data produces identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .lattice import Lattice


class ObjFormatError(ValueError):
    pass


def json_ready(x):
    """Recursively convert numpy and Fraction values into JSON-safe types."""
    if isinstance(x, dict):
        return {str(k): json_ready(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_ready(v) for v in x]
    if isinstance(x, np.ndarray):
        return json_ready(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Fraction):
        return str(x)
    return x


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(json_ready(obj), fh, sort_keys=True, indent=1,
                  separators=(",", ": "))
        fh.write("\n")


def write_obj_4d(path, verts: np.ndarray, tris: np.ndarray,
                 boundary_mask=None, sidecar: dict | None = None) -> None:
    """Lossless mesh checkpoint: OBJ plus `<path>.json` sidecar.

    The sidecar holds the exact four-dimensional vertices, the boundary
    tags, and whatever extra report data the caller passes.
    """
    verts = np.asarray(verts, dtype=float)
    tris = np.asarray(tris, dtype=int)
    lines = ["# checkpoint mesh on the unit three-sphere",
             "# each vertex line is preceded by its fourth coordinate",
             f"# vertices {len(verts)} faces {len(tris)}"]
    for p in verts.tolist():
        lines.append(f"# w4 {p[3]!r}")
        lines.append(f"v {p[0]!r} {p[1]!r} {p[2]!r}")
    for a, b, c in tris:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    meta = {
        "format": "s3-mesh-checkpoint",
        "vertices": verts.tolist(),
        "triangles": tris.tolist(),
        "boundary": (None if boundary_mask is None
                     else np.asarray(boundary_mask, dtype=bool).tolist()),
    }
    if sidecar:
        meta.update(sidecar)
    dump_json(meta, str(path) + ".json")


def read_obj_4d(path):
    """Read a checkpoint written by write_obj_4d. Returns (verts, tris)."""
    verts, tris = [], []
    pending_w = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("# w4 "):
                pending_w = float(line[5:])
            elif line.startswith("v "):
                x, y, z = (float(q) for q in line[2:].split())
                if pending_w is None:
                    raise ObjFormatError(
                        "vertex line without a preceding # w4 comment")
                verts.append((x, y, z, pending_w))
                pending_w = None
            elif line.startswith("f "):
                ids = [int(q.split("/")[0]) - 1 for q in line[2:].split()]
                if len(ids) != 3:
                    raise ObjFormatError("only triangle faces are supported")
                tris.append(ids)
    if not verts:
        raise ObjFormatError(f"no vertices found in {path}")
    return np.array(verts, dtype=float), np.array(tris, dtype=int)


def stereographic_basis(pole: np.ndarray):
    """Deterministic orthonormal basis of the hyperplane orthogonal to pole."""
    pole = np.asarray(pole, dtype=float)
    basis = []
    for i in range(4):
        cand = np.eye(4)[i] - float(pole[i]) * pole
        for b in basis:
            cand = cand - float(cand @ b) * b
        n = np.linalg.norm(cand)
        if n > 0.3:
            basis.append(cand / n)
        if len(basis) == 3:
            return basis
    raise ValueError("could not build a basis orthogonal to the pole")


def stereographic(verts: np.ndarray, pole: np.ndarray) -> np.ndarray:
    """Stereographic projection of S^3 to R^3 from the given pole."""
    verts = np.asarray(verts, dtype=float)
    pole = np.asarray(pole, dtype=float)
    denom = 1.0 - verts @ pole
    if float(np.min(np.abs(denom))) < 1e-9:
        raise ValueError("a vertex coincides with the projection pole")
    b = np.column_stack(stereographic_basis(pole))
    return (verts @ b) / denom[:, None]


def default_pole(lat: Lattice) -> np.ndarray:
    """Antipode of an integer-index point of the upper circle.

    Integer-index points of either distinguished circle never lie on the
    surface (only half-integer points do), so the projection is finite on
    all of it.
    """
    return -lat.t_upper(lat.k // 2)


def write_obj_stereo(path, verts: np.ndarray, tris: np.ndarray,
                     pole: np.ndarray, sidecar: dict | None = None,
                     min_pole_distance: float = 1e-2) -> None:
    """Viewable OBJ: vertices projected stereographically from the pole,
    exact four-dimensional vertices preserved in `<path>.json`."""
    verts = np.asarray(verts, dtype=float)
    tris = np.asarray(tris, dtype=int)
    pole = np.asarray(pole, dtype=float)
    gap = float(np.min(np.linalg.norm(verts - pole, axis=1)))
    if gap < min_pole_distance:
        raise ValueError(
            f"projection pole is {gap:.3e} from the mesh; pick a pole "
            "farther from the surface")
    proj = stereographic(verts, pole)
    pl = pole.tolist()
    lines = ["# stereographic projection of a mesh on the unit three-sphere",
             f"# pole {pl[0]!r} {pl[1]!r} {pl[2]!r} {pl[3]!r}",
             f"# vertices {len(verts)} faces {len(tris)}"]
    for p in proj.tolist():
        lines.append(f"v {p[0]!r} {p[1]!r} {p[2]!r}")
    for a, b, c in tris:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    meta = {
        "format": "s3-mesh-stereographic",
        "pole": pole.tolist(),
        "vertices": verts.tolist(),
        "triangles": tris.tolist(),
    }
    if sidecar:
        meta.update(sidecar)
    dump_json(meta, str(path) + ".json")
