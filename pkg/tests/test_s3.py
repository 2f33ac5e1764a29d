"""Geometry kernel: circles, spheres, intersections, rotations, tetrahedra."""

import math

import numpy as np
import pytest

from lawsonkit import s3

E = np.eye(4)
C01 = s3.GreatCircle(E[0], E[1])
C02 = s3.GreatCircle(E[0], E[2])
C23 = s3.GreatCircle(E[2], E[3])


def test_unit_normalizes():
    v = s3.unit(np.array([3.0, 0.0, 4.0, 0.0]))
    assert np.allclose(v, [0.6, 0.0, 0.8, 0.0])


def test_cross4_orientation():
    # cross4(a, b, c) . d = det[a, b, c, d]
    w = s3.cross4(E[0], E[1], E[2])
    assert np.allclose(w, E[3])
    rng = np.random.default_rng(0)
    a, b, c, d = rng.normal(size=(4, 4))
    lhs = float(np.dot(s3.cross4(a, b, c), d))
    rhs = float(np.linalg.det(np.stack([a, b, c, d])))
    assert abs(lhs - rhs) < 1e-12


def test_circle_frame_orthonormal():
    frame = np.stack([C01.e1, C01.e2, C01.f1, C01.f2])
    assert np.allclose(frame @ frame.T, np.eye(4), atol=1e-14)
    assert np.linalg.det(frame.T) > 0


def test_circle_point_at_and_contains():
    assert np.allclose(C01.point_at(0.0), E[0])
    assert np.allclose(C01.point_at(math.pi / 2), E[1])
    assert np.allclose(C01.point_at(2 * math.pi), C01.point_at(0.0))
    assert C01.contains(s3.unit(E[0] + E[1]))
    assert not C01.contains(E[2])


def test_circle_distance():
    assert C01.distance(E[2]) == pytest.approx(math.pi / 2)
    assert C01.distance(s3.unit(E[0] + E[2])) == pytest.approx(math.pi / 4)
    assert C01.distance(E[0]) == pytest.approx(0.0, abs=1e-15)


def test_circle_through_same_circle():
    p = C01.point_at(0.7)
    q = C01.point_at(0.7 + math.pi / 2)
    other = s3.GreatCircle.through(p, q)
    assert C01.same_circle(other)
    assert not C01.same_circle(C02)


def test_circle_orthocomplement_involution():
    comp = C01.orthocomplement()
    assert comp.contains(E[2]) and comp.contains(E[3])
    assert C01.same_circle(comp.orthocomplement())


def test_circle_projector():
    P = C01.projector()
    assert np.allclose(P @ P, P, atol=1e-14)
    assert np.allclose(P @ E[0], E[0])
    assert np.allclose(P @ E[2], 0.0)


def test_circle_tangent_at():
    p = C01.point_at(0.3)
    t = C01.tangent_at(p)
    assert abs(np.linalg.norm(t) - 1) < 1e-14
    assert abs(float(np.dot(t, p))) < 1e-14
    # forward difference along the parametrization
    fd = s3.unit(C01.point_at(0.3 + 1e-8) - p)
    assert np.allclose(t, fd, atol=1e-7)


def test_circle_reflection_is_half_turn():
    R = C01.reflection()
    assert np.allclose(R @ R, np.eye(4), atol=1e-14)
    assert np.allclose(R @ E[0], E[0])
    assert np.allclose(R @ E[2], -E[2])
    assert np.linalg.det(R) == pytest.approx(1.0)


def test_sphere_basics():
    s = s3.GreatSphere(E[3])
    assert s.contains(E[0]) and s.contains(s3.unit(E[0] + E[1]))
    p = s3.unit(E[0] + E[3])
    assert s.distance(p) == pytest.approx(math.pi / 4)
    R = s.reflection()
    assert np.allclose(R @ E[3], -E[3])
    assert np.allclose(R @ E[0], E[0])
    assert np.linalg.det(R) == pytest.approx(-1.0)


def test_sphere_through():
    s = s3.GreatSphere.through(C01, E[2])
    assert s.same_sphere(s3.GreatSphere(E[3]))
    with pytest.raises(s3.GeometryError):
        s3.GreatSphere.through(C01, s3.unit(E[0] + E[1]))


def test_circle_circle_intersection_kinds():
    kind, pts = s3.circle_circle_intersection(C01, C02)
    assert kind == "points"
    assert np.allclose(pts[0], -pts[1])
    assert abs(abs(float(pts[0] @ E[0])) - 1) < 1e-12
    assert s3.circle_circle_intersection(C01, C23)[0] == "empty"
    again = s3.GreatCircle(E[1], E[0])
    assert s3.circle_circle_intersection(C01, again)[0] == "equal"


def test_circle_sphere_intersection_kinds():
    kind, _ = s3.circle_sphere_intersection(C01, s3.GreatSphere(E[2]))
    assert kind == "contained"
    kind, pts = s3.circle_sphere_intersection(C01, s3.GreatSphere(E[0]))
    assert kind == "points"
    assert np.allclose(np.abs(pts[0]), E[1])


def test_sphere_sphere_intersection_kinds():
    kind, circ = s3.sphere_sphere_intersection(
        s3.GreatSphere(E[0]), s3.GreatSphere(E[3]))
    assert kind == "circle"
    assert circ.contains(E[1]) and circ.contains(E[2])
    kind, val = s3.sphere_sphere_intersection(
        s3.GreatSphere(E[0]), s3.GreatSphere(-E[0]))
    assert kind == "equal" and val is None


def test_angles_fold_to_first_quadrant():
    assert s3.circle_angle_at(C01, C02, E[0]) == pytest.approx(math.pi / 2)
    tilted = s3.GreatSphere(s3.unit(E[0] + E[2]))
    a = s3.sphere_angle(s3.GreatSphere(E[0]), tilted)
    assert 0 <= a <= math.pi / 2 + 1e-15
    assert a == pytest.approx(math.pi / 4)


def test_geodesic_endpoints_and_length():
    p, q = E[0], s3.unit(E[0] + E[1])
    assert np.allclose(s3.geodesic(p, q, 0.0), p)
    assert np.allclose(s3.geodesic(p, q, 1.0), q)
    assert s3.geodesic_length(p, q) == pytest.approx(math.pi / 4)
    mid = s3.geodesic_midpoint(p, q)
    assert s3.sphere_distance(p, mid) == pytest.approx(s3.sphere_distance(mid, q))


def test_geodesic_antipodal_rejected():
    with pytest.raises(s3.DegenerateGeodesicError):
        s3.geodesic(E[0], -E[0], 0.5)


def test_arc_distance():
    p, q = E[0], E[1]
    on = s3.geodesic(p, q, 0.25)
    assert s3.arc_distance(p, q, on) < 1e-12
    assert s3.arc_distance(p, q, E[2]) == pytest.approx(math.pi / 2)


def test_rotations_fix_the_right_sets():
    phi = 0.8317
    Ra = s3.rotate_about(C01, phi)
    Rl = s3.rotate_along(C01, phi)
    for R in (Ra, Rl):
        assert np.allclose(R @ R.T, np.eye(4), atol=1e-14)
        assert np.linalg.det(R) == pytest.approx(1.0)
    assert np.allclose(Ra @ E[0], E[0])
    assert np.allclose(Rl @ E[2], E[2])
    # rotation along moves circle points by phi
    assert np.allclose(Rl @ C01.point_at(0.1), C01.point_at(0.1 + phi))


def test_killing_fields_match_rotations():
    rng = np.random.default_rng(3)
    p = s3.unit(rng.normal(size=4))
    eps = 1e-7
    for killing, rot in ((s3.killing_along, s3.rotate_along),
                        (s3.killing_about, s3.rotate_about)):
        tv = killing(C01, p)
        assert abs(float(np.dot(tv.vec, tv.base))) < 1e-12
        fd = (rot(C01, eps) @ p - p) / eps
        assert np.allclose(tv.vec, fd, atol=1e-6)


def test_killing_generators_antisymmetric():
    for gen in (s3.killing_generator_along(C01), s3.killing_generator_about(C01)):
        assert np.allclose(gen, -gen.T)


def test_reflection_matrix_involution():
    basis = [E[0], E[1], E[2]]
    R = s3.reflection_matrix(basis)
    assert np.allclose(R @ R, np.eye(4), atol=1e-14)
    assert np.allclose(R @ E[1], E[1])
    assert np.allclose(R @ E[3], -E[3])
    assert np.allclose(s3.reflect(basis, E[3]), -E[3])


def test_orbit_project_idempotent_and_constant():
    rng = np.random.default_rng(11)
    pole = C01.point_at(0.4)
    x = s3.unit(rng.normal(size=4))
    p = s3.orbit_project(C01, pole, x)
    assert np.allclose(s3.orbit_project(C01, pole, p), p, atol=1e-14)
    moved = s3.rotate_along(C01, 2.1) @ x
    assert np.allclose(s3.orbit_project(C01, pole, moved), p, atol=1e-12)
    with pytest.raises(s3.GeometryError):
        s3.orbit_project(C01, E[2], x)


def test_orbit_disc_coords_invariant():
    x = s3.unit(np.array([0.3, -0.2, 0.8, 0.4]))
    d0 = s3.orbit_disc_coords(C01, x)
    d1 = s3.orbit_disc_coords(C01, s3.rotate_along(C01, 1.234) @ x)
    assert np.allclose(d0, d1, atol=1e-14)


ORTHANT = np.stack([E[0], E[1], E[2], E[3]])


def test_tetrahedron_orthant():
    tet = s3.SphericalTetrahedron(ORTHANT)
    c = tet.centroid()
    assert tet.contains(c[None, :])[0]
    assert tet.margin(c[None, :])[0] > 0
    coeffs = tet.coefficients(E[0])
    assert np.allclose(coeffs, [1, 0, 0, 0], atol=1e-14)
    for e in range(6):
        assert tet.dihedral_angle(e) == pytest.approx(math.pi / 2)
        assert tet.edge_length(e) == pytest.approx(math.pi / 2)


def test_tetrahedron_edge_structure():
    # six edges; consecutive pairs (0,1), (2,5), (3,4) are opposite
    assert len(s3.EDGES) == 6
    for a, b in ((0, 1), (2, 5), (3, 4)):
        assert not set(s3.EDGES[a]) & set(s3.EDGES[b])
    tet = s3.SphericalTetrahedron(ORTHANT)
    u, v = tet.edge_vertices(0)
    assert {tuple(np.round(u)), tuple(np.round(v))} == \
        {tuple(E[s3.EDGES[0][0]]), tuple(E[s3.EDGES[0][1]])}


def test_tetrahedron_random_interior_points():
    tet = s3.SphericalTetrahedron(ORTHANT)
    pts = tet.random_interior_points(200, np.random.default_rng(5))
    assert pts.shape == (200, 4)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    assert np.all(tet.margin(pts) > 0)
    again = tet.random_interior_points(200, np.random.default_rng(5))
    assert np.array_equal(pts, again)


def test_tetrahedron_degenerate_rejected():
    flat = np.stack([E[0], E[1], E[2], s3.unit(E[0] + E[1])])
    with pytest.raises(s3.InvalidTetrahedronError):
        s3.SphericalTetrahedron(flat)


def test_relations_survey_passes():
    survey = s3.basic_relations_survey(n_samples=64, tol=1e-9,
                                       rng=np.random.default_rng(2))
    assert survey.ok
    assert survey.max_residual < 1e-9
    assert len(survey.residuals) == 9
    d = survey.to_json_dict()
    assert d["ok"] is True and d["n_samples"] == 64


def test_relations_survey_deterministic():
    a = s3.basic_relations_survey(n_samples=16, rng=np.random.default_rng(7))
    b = s3.basic_relations_survey(n_samples=16, rng=np.random.default_rng(7))
    assert a.residuals == b.residuals
