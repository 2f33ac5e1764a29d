"""Lattice points, bisecting spheres, cells, coverage, and axis orbits."""

import math

import numpy as np
import pytest

from lawsonkit import s3
from lawsonkit.lattice import (HALF, Lattice, UnsupportedParametersError,
                               axis_rotation_survey, cell_metrics,
                               expected_metrics)


@pytest.mark.parametrize("m,k", [(3, 1), (2, 2), (1, 5), (0, 0)])
def test_parameters_rejected(m, k):
    with pytest.raises(UnsupportedParametersError):
        Lattice(m, k)


def test_fractional_index_rejected(lat32):
    with pytest.raises(ValueError):
        lat32.t_lower(0.25)


def test_lattice_points(lat32):
    # t on the lower circle at angle i*pi/m, upper at j*pi/k
    assert np.allclose(lat32.t_lower(0), [1, 0, 0, 0])
    assert np.allclose(lat32.t_lower(1),
                       [math.cos(math.pi / 3), math.sin(math.pi / 3), 0, 0])
    assert np.allclose(lat32.t_lower(HALF),
                       [math.cos(math.pi / 6), math.sin(math.pi / 6), 0, 0])
    assert np.allclose(lat32.t_upper(0), [0, 0, 1, 0])
    assert np.allclose(lat32.t_upper(1), [0, 0, 0, 1])
    # period 2m on the half-integer grid
    assert np.allclose(lat32.t_lower(HALF + 6), lat32.t_lower(HALF))


def test_bisecting_spheres(lat32):
    assert len(lat32.spheres()) == 5
    n = lat32.sigma_lower(1).normal
    assert np.allclose(n, [-math.sin(math.pi / 3), math.cos(math.pi / 3), 0, 0])
    nu = lat32.sigma_upper(1).normal
    assert np.allclose(nu, [0, 0, -math.sin(math.pi / 2), math.cos(math.pi / 2)])
    # each lower sphere contains the whole upper circle
    up = s3.GreatCircle(np.eye(4)[2], np.eye(4)[3])
    for t in np.linspace(0, 2 * math.pi, 7):
        assert lat32.sigma_lower(2).contains(up.point_at(t))


def test_cell_counts(lat32):
    assert len(lat32.cells("int")) == 24
    assert len(lat32.cells("half")) == 24
    assert len(lat32.cells("even")) == 12
    assert len(lat32.cells("odd")) == 12
    evens = {(c.i, c.j) for c in lat32.cells("even")}
    odds = {(c.i, c.j) for c in lat32.cells("odd")}
    assert not evens & odds
    assert evens | odds == {(c.i, c.j) for c in lat32.cells("int")}
    assert all((c.i + c.j) % 2 == 0 for c in lat32.cells("even"))
    assert all((c.i + c.j) % 2 == 1 for c in lat32.cells("odd"))


def test_cell_vertices(lat32):
    tet = lat32.tetra(lat32.cell("int", 0, 0))
    want = np.stack([lat32.t_lower(-HALF), lat32.t_lower(HALF),
                     lat32.t_upper(-HALF), lat32.t_upper(HALF)])
    assert np.allclose(tet.verts, want)
    shifted = lat32.tetra(lat32.cell("half", HALF, HALF))
    want = np.stack([lat32.t_lower(0), lat32.t_lower(1),
                     lat32.t_upper(0), lat32.t_upper(1)])
    assert np.allclose(shifted.verts, want)


def test_cell_metrics_exact(lat32):
    want = expected_metrics(lat32)
    assert want["lengths"][0] == pytest.approx(math.pi / 3)
    assert want["lengths"][1] == pytest.approx(math.pi / 2)
    assert want["dihedrals"][0] == pytest.approx(math.pi / 2)
    assert want["dihedrals"][1] == pytest.approx(math.pi / 3)
    assert want["lengths"][2:] == pytest.approx([math.pi / 2] * 4)
    for idx in lat32.cells("int") + lat32.cells("half"):
        got = cell_metrics(lat32, idx)
        assert got["lengths"] == pytest.approx(want["lengths"], abs=1e-12)
        assert got["dihedrals"] == pytest.approx(want["dihedrals"], abs=1e-12)


def test_cell_metrics_exact_43():
    lat = Lattice(4, 3)
    want = expected_metrics(lat)
    assert want["lengths"][0] == pytest.approx(math.pi / 4)
    assert want["dihedrals"][1] == pytest.approx(math.pi / 4)
    for idx in lat.cells("int")[:8]:
        got = cell_metrics(lat, idx)
        assert got["lengths"] == pytest.approx(want["lengths"], abs=1e-12)


def test_locate_centroid_unique(lat32):
    for idx in lat32.cells("int")[:6]:
        c = lat32.tetra(idx).centroid()
        assert lat32.locate(c, "int") == [idx]


def test_locate_vertex_shares(lat32):
    # t at a half-integer lower index is a vertex of every integer cell
    # whose lower interval ends there, for any upper interval: 2 * 2k cells
    found = lat32.locate(lat32.t_lower(HALF), "int")
    assert len(found) == 8
    for idx in found:
        assert min(np.linalg.norm(lat32.tetra(idx).verts
                                  - lat32.t_lower(HALF), axis=1)) < 1e-12
        assert idx.i in (0, 1)


def test_coverage_multiplicity_one(lat32):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(2000, 4))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    for fam in ("int", "half"):
        strict = lat32.coverage_counts(pts, fam, tol=-1e-9)
        loose = lat32.coverage_counts(pts, fam, tol=1e-9)
        assert np.all(strict <= 1)
        assert np.all(loose >= 1)


def test_cell_group_orders(lat32):
    assert len(lat32.cell_group(0, 0)) == 4
    assert len(lat32.cell_group_hat(HALF, HALF)) == 2
    tet = lat32.tetra(lat32.cell("int", 0, 0))
    for g in lat32.cell_group(0, 0):
        assert np.all(tet.margin(tet.verts @ g.T) > -1e-12)


def test_boundary_parts(lat32):
    idx = lat32.cell("int", 0, 0)
    parts = lat32.boundary_parts(idx)
    tet = lat32.tetra(idx)
    quad = parts.quad.sample(16)
    assert np.max(np.abs(tet.margin(quad))) < 1e-10
    # quad corners alternate between the two circles
    corners = [parts.quad.arc_endpoints(a)[0] for a in range(4)]
    on_lower = [np.hypot(c[2], c[3]) < 1e-12 for c in corners]
    assert sum(on_lower) == 2
    # the quad is the seam between the two boundary halves
    for tri in parts.plus_triangles + parts.minus_triangles:
        assert np.max(np.abs(tet.margin(tri))) < 1e-10


def test_quad_circles(lat32):
    assert len(lat32.circles_quad()) == 6
    assert len(lat32.circles_axes()) == 6
    idx = lat32.cell("int", 0, 0)
    axis = lat32.axis(idx)
    assert axis.contains(lat32.t_lower(0))
    assert axis.contains(lat32.t_upper(0))
    # each quad circle meets the base circles exactly in half-grid points
    low = [lat32.t_lower(HALF + n) for n in range(6)]
    up = [lat32.t_upper(HALF + n) for n in range(4)]
    for _, circ in lat32.circles_quad():
        assert sum(circ.contains(p, tol=1e-12) for p in low) == 2
        assert sum(circ.contains(p, tol=1e-12) for p in up) == 2


def test_face_planes(lat32):
    idx = lat32.cell("int", 0, 0)
    tet = lat32.tetra(idx)
    planes = lat32.face_planes(idx)
    assert len(planes) == 4
    assert sorted(part for _, part in planes) == ["minus", "minus", "plus", "plus"]
    for normal, _ in planes:
        assert abs(np.linalg.norm(normal) - 1) < 1e-12
        # face spheres pass through the cell boundary, not the interior
        assert abs(float(normal @ tet.centroid())) > 1e-3


def test_axis_survey(lat32):
    sv = axis_rotation_survey(lat32, lat32.cell("int", 0, 0), n_orbits=64,
                              rng=np.random.default_rng(1))
    assert sv.ok
    assert sv.orbit_count == 64
    assert abs(sv.winding) == 1
    assert sv.pole_inside
    assert sv.failures == []


def test_axis_survey_deterministic(lat32):
    idx = lat32.cell("int", 1, 0)
    a = axis_rotation_survey(lat32, idx, n_orbits=16,
                             rng=np.random.default_rng(9))
    b = axis_rotation_survey(lat32, idx, n_orbits=16,
                             rng=np.random.default_rng(9))
    assert a.winding == b.winding
    assert a.min_crossing_rate == b.min_crossing_rate


def test_to_json_dict(lat32):
    d = lat32.to_json_dict()
    assert d["m"] == 3 and d["k"] == 2
