"""Checkpoint OBJ round trips, stereographic export, deterministic JSON."""

import json
from fractions import Fraction

import numpy as np
import pytest

from lawsonkit import objio, plateau


@pytest.fixture
def small_mesh(lat32):
    return plateau.initial_disc(lat32, 2)


def test_obj_roundtrip_exact(tmp_path, small_mesh):
    path = str(tmp_path / "disc.obj")
    objio.write_obj_4d(path, small_mesh.verts, small_mesh.tris,
                       small_mesh.boundary_mask)
    v, t = objio.read_obj_4d(path)
    assert np.array_equal(v, small_mesh.verts)
    assert np.array_equal(t, small_mesh.tris)


def test_obj_sidecar(tmp_path, small_mesh):
    path = str(tmp_path / "disc.obj")
    objio.write_obj_4d(path, small_mesh.verts, small_mesh.tris,
                       small_mesh.boundary_mask)
    side = json.load(open(path + ".json"))
    assert side["format"] == "s3-mesh-checkpoint"
    assert np.array_equal(np.asarray(side["vertices"]), small_mesh.verts)
    assert np.array_equal(np.asarray(side["triangles"]), small_mesh.tris)
    assert np.array_equal(np.asarray(side["boundary"]),
                          small_mesh.boundary_mask)


def test_obj_requires_fourth_coordinate(tmp_path):
    path = tmp_path / "flat.obj"
    path.write_text("v 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\n")
    with pytest.raises(objio.ObjFormatError):
        objio.read_obj_4d(str(path))


def test_obj_rejects_quads(tmp_path):
    path = tmp_path / "quad.obj"
    lines = ["# w4 0.0", "v 1 0 0", "# w4 0.0", "v 0 1 0",
             "# w4 0.0", "v 0 0 1", "# w4 1.0", "v 0 0 0",
             "f 1 2 3 4"]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(objio.ObjFormatError):
        objio.read_obj_4d(str(path))


def test_stereo_export(tmp_path, lat32, small_mesh):
    path = str(tmp_path / "proj.obj")
    pole = objio.default_pole(lat32)
    objio.write_obj_stereo(path, small_mesh.verts, small_mesh.tris, pole)
    lines = open(path).read().splitlines()
    vlines = [ln for ln in lines if ln.startswith("v ")]
    assert len(vlines) == len(small_mesh.verts)
    assert all(len(ln.split()) == 4 for ln in vlines)
    side = json.load(open(path + ".json"))
    assert np.array_equal(np.asarray(side["vertices"]), small_mesh.verts)


def test_stereo_pole_clearance(tmp_path, lat32, small_mesh):
    # a pole on the mesh itself blows up the projection and is refused
    pole = small_mesh.verts[0]
    with pytest.raises(ValueError):
        objio.write_obj_stereo(str(tmp_path / "bad.obj"),
                               small_mesh.verts, small_mesh.tris, pole)


def test_default_pole(lat32, surf32):
    pole = objio.default_pole(lat32)
    assert np.allclose(pole, -lat32.t_upper(1))
    gaps = np.linalg.norm(surf32.verts - pole, axis=1)
    assert gaps.min() > 1e-2


def test_dump_json_deterministic(tmp_path):
    a = {"zeta": 1, "alpha": [np.float64(0.5), np.int64(3)],
         "frac": Fraction(1, 3)}
    b = {"frac": Fraction(1, 3), "alpha": [np.float64(0.5), np.int64(3)],
         "zeta": 1}
    pa, pb = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    objio.dump_json(a, pa)
    objio.dump_json(b, pb)
    assert open(pa, "rb").read() == open(pb, "rb").read()
    loaded = json.load(open(pa))
    assert loaded["frac"] == "1/3"
    assert loaded["alpha"] == [0.5, 3]


def test_dump_json_trailing_newline(tmp_path):
    p = str(tmp_path / "x.json")
    objio.dump_json({"v": 1}, p)
    assert open(p, "rb").read().endswith(b"\n")


def test_json_ready_arrays():
    out = objio.json_ready({"m": np.arange(3), "x": np.float32(2.0)})
    assert out == {"m": [0, 1, 2], "x": 2.0}
    assert json.dumps(out)
