"""Geometry kernel for the unit three-sphere in R^4.

Everything reduces to closed-form linear algebra on 4-vectors: reflections
through linear subspaces, rotations about and along great circles, Killing
fields with their orbit projections, geodesics, and spherical tetrahedra
realized as nonnegative-combination cones over four independent vertices.

Points are plain numpy arrays of shape (4,) with unit norm. Isometries are
orthogonal (4, 4) matrices acting by left multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10
MEMBERSHIP_TOL = 1e-10
SUBSPACE_TOL = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input."""


class DegenerateGeodesicError(GeometryError):
    """Geodesic endpoints are antipodal (no unique minimizing arc)."""


class InvalidTetrahedronError(GeometryError):
    """Tetrahedron vertices are linearly dependent."""


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise GeometryError("cannot normalize the zero vector")
    return v / n


def require_point(p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise GeometryError(f"expected a 4-vector, got shape {p.shape}")
    if abs(np.linalg.norm(p) - 1.0) > tol:
        raise GeometryError("point is not on the unit sphere")
    return p


def sphere_distance(p: np.ndarray, q: np.ndarray) -> float:
    # atan2 form is accurate for both tiny and near-pi angles
    return 2.0 * math.atan2(float(np.linalg.norm(p - q)),
                            float(np.linalg.norm(p + q)))


def cross4(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """The vector d with d.x = det[a, b, c, x] for all x.

    d is orthogonal to a, b, c and the frame [a, b, c, d] is positively
    oriented whenever a, b, c are independent.
    """
    return cross4_many(np.asarray(a, float)[None, :],
                       np.asarray(b, float)[None, :],
                       np.asarray(c, float)[None, :])[0]


def cross4_many(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Row-wise cross4 for (n, 4) arrays, via explicit cofactor expansion."""
    # 2x2 minors of the (n, 2, 4) stack [b, c] over column pairs (i, j)
    def m2(i, j):
        return b[:, i] * c[:, j] - b[:, j] * c[:, i]

    m01, m02, m03 = m2(0, 1), m2(0, 2), m2(0, 3)
    m12, m13, m23 = m2(1, 2), m2(1, 3), m2(2, 3)
    d = np.empty_like(a)
    # cofactors of the last column of [a b c x], rows 0-based
    d[:, 0] = -(a[:, 1] * m23 - a[:, 2] * m13 + a[:, 3] * m12)
    d[:, 1] = a[:, 0] * m23 - a[:, 2] * m03 + a[:, 3] * m02
    d[:, 2] = -(a[:, 0] * m13 - a[:, 1] * m03 + a[:, 3] * m01)
    d[:, 3] = a[:, 0] * m12 - a[:, 1] * m02 + a[:, 2] * m01
    return d


def require_orthonormal(vectors, tol: float = ORTHO_TOL):
    vs = [np.asarray(v, dtype=float) for v in vectors]
    for i, v in enumerate(vs):
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise GeometryError(f"basis vector {i} is not unit length")
        for w in vs[:i]:
            if abs(float(np.dot(v, w))) > tol:
                raise GeometryError("basis vectors are not orthogonal")
    return vs


def reflection_matrix(basis) -> np.ndarray:
    """Reflection through span(basis): identity on the span, minus identity
    on the orthogonal complement. basis holds 1..3 orthonormal 4-vectors."""
    vs = require_orthonormal(basis)
    if not 1 <= len(vs) <= 3:
        raise GeometryError("reflection subspace must have dimension 1..3")
    proj = sum(np.outer(v, v) for v in vs)
    return 2.0 * proj - np.eye(4)


def reflect(basis, p: np.ndarray) -> np.ndarray:
    return reflection_matrix(basis) @ np.asarray(p, dtype=float)


@dataclass(frozen=True)
class TangentVector:
    """A vector attached to a base point, orthogonal to it."""

    base: np.ndarray
    vec: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))


class GreatCircle:
    """Oriented great circle: the unit circle of an oriented 2-plane.

    The plane carries the orientation e1 -> e2. A complement frame (f1, f2)
    is derived deterministically so that [e1, e2, f1, f2] is positively
    oriented; rotations about the circle turn f1 toward f2, which pins down
    the rotation sense without further bookkeeping.
    """

    __slots__ = ("e1", "e2", "f1", "f2")

    def __init__(self, e1, e2):
        e1, e2 = require_orthonormal([e1, e2])
        self.e1 = e1
        self.e2 = e2
        proj = np.outer(e1, e1) + np.outer(e2, e2)
        # first standard basis vector clearly outside the plane; at least one
        # residual is >= sqrt(1/2) since the residuals' squares sum to 2
        for i in range(4):
            cand = np.eye(4)[i] - proj @ np.eye(4)[i]
            if np.linalg.norm(cand) > 0.6:
                break
        f1 = unit(cand)
        f2 = unit(cross4(e1, e2, f1))
        self.f1 = f1
        self.f2 = f2

    @classmethod
    def through(cls, p: np.ndarray, q: np.ndarray) -> "GreatCircle":
        """Great circle through two non-antipodal, non-equal points,
        oriented p -> q."""
        p = require_point(p)
        q = np.asarray(q, dtype=float)
        w = q - float(np.dot(q, p)) * p
        if np.linalg.norm(w) < 1e-12:
            raise GeometryError("points are equal or antipodal; circle not unique")
        return cls(p, unit(w))

    def point_at(self, phi: float) -> np.ndarray:
        return math.cos(phi) * self.e1 + math.sin(phi) * self.e2

    def tangent_at(self, p: np.ndarray) -> np.ndarray:
        """Unit tangent of the circle at a point of the circle."""
        return unit(float(np.dot(self.e1, p)) * self.e2 - float(np.dot(self.e2, p)) * self.e1)

    def projector(self) -> np.ndarray:
        return np.outer(self.e1, self.e1) + np.outer(self.e2, self.e2)

    def contains(self, p: np.ndarray, tol: float = 1e-9) -> bool:
        return self.distance(p) <= tol

    def distance(self, p: np.ndarray) -> float:
        inplane = np.linalg.norm(self.projector() @ p)
        out = math.hypot(float(np.dot(self.f1, p)), float(np.dot(self.f2, p)))
        return math.atan2(out, float(inplane))

    def orthocomplement(self) -> "GreatCircle":
        return GreatCircle(self.f1, self.f2)

    def reflection(self) -> np.ndarray:
        return reflection_matrix([self.e1, self.e2])

    def same_circle(self, other: "GreatCircle", tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.projector() - other.projector())) <= tol)


class GreatSphere:
    """Great 2-sphere: unit sphere of the hyperplane with unit normal n."""

    __slots__ = ("normal",)

    def __init__(self, normal):
        self.normal = unit(np.asarray(normal, dtype=float))

    @classmethod
    def through(cls, circle: GreatCircle, p: np.ndarray) -> "GreatSphere":
        """The great sphere containing a great circle and one more point."""
        if circle.contains(p, tol=1e-12):
            raise GeometryError("point lies on the circle; sphere not unique")
        n = cross4(circle.e1, circle.e2, np.asarray(p, dtype=float))
        if np.linalg.norm(n) < 1e-12:
            raise GeometryError("point is linearly dependent on the circle plane")
        return cls(n)

    def contains(self, p: np.ndarray, tol: float = 1e-9) -> bool:
        return abs(float(np.dot(self.normal, p))) <= tol

    def distance(self, p: np.ndarray) -> float:
        return abs(math.asin(max(-1.0, min(1.0, float(np.dot(self.normal, p))))))

    def reflection(self) -> np.ndarray:
        return np.eye(4) - 2.0 * np.outer(self.normal, self.normal)

    def same_sphere(self, other: "GreatSphere", tol: float = 1e-9) -> bool:
        d = min(np.max(np.abs(self.normal - other.normal)),
                np.max(np.abs(self.normal + other.normal)))
        return bool(d <= tol)


def rotate_about(circle: GreatCircle, phi: float) -> np.ndarray:
    """Rotation fixing the circle pointwise, turning its complement plane by
    phi (f1 toward f2)."""
    c, s = math.cos(phi), math.sin(phi)
    e1, e2, f1, f2 = circle.e1, circle.e2, circle.f1, circle.f2
    return (np.outer(e1, e1) + np.outer(e2, e2)
            + c * (np.outer(f1, f1) + np.outer(f2, f2))
            + s * (np.outer(f2, f1) - np.outer(f1, f2)))


def rotate_along(circle: GreatCircle, phi: float) -> np.ndarray:
    """Rotation moving the circle within itself by arc phi (e1 toward e2),
    fixing the complement circle pointwise."""
    return rotate_about(circle.orthocomplement(), phi)


def killing_generator_about(circle: GreatCircle) -> np.ndarray:
    """Matrix A with exp(phi*A) = rotate_about(circle, phi)."""
    return np.outer(circle.f2, circle.f1) - np.outer(circle.f1, circle.f2)


def killing_generator_along(circle: GreatCircle) -> np.ndarray:
    return killing_generator_about(circle.orthocomplement())


def killing_about(circle: GreatCircle, p: np.ndarray) -> TangentVector:
    """Killing field of the rotations about the circle, evaluated at p.

    Vanishes exactly on the circle, has unit norm on the complement circle.
    """
    p = np.asarray(p, dtype=float)
    return TangentVector(base=p, vec=killing_generator_about(circle) @ p)


def killing_along(circle: GreatCircle, p: np.ndarray) -> TangentVector:
    return killing_about(circle.orthocomplement(), p)


def orbit_project(circle: GreatCircle, pole: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Collapse the orbits of the rotations along `circle` onto the closed
    hemisphere spanned by the complement circle and `pole`.

    pole must lie on `circle`. The orbit through x rotates x's components in
    the circle plane and fixes the complement components, so the projection
    keeps the complement components and moves the in-plane part to radius
    r >= 0 along the pole direction. Total, idempotent, constant on orbits.
    """
    pole = np.asarray(pole, dtype=float)
    if circle.distance(pole) > 1e-10:
        raise GeometryError("pole must lie on the circle")
    x = np.asarray(x, dtype=float)
    a = float(np.dot(x, circle.e1))
    b = float(np.dot(x, circle.e2))
    c = float(np.dot(x, circle.f1))
    d = float(np.dot(x, circle.f2))
    r = math.hypot(a, b)
    return r * pole + c * circle.f1 + d * circle.f2


def orbit_disc_coords(circle: GreatCircle, x: np.ndarray) -> np.ndarray:
    """Orbit invariants of x: its components along the complement plane.

    Two points lie on the same rotation orbit along `circle` iff these two
    numbers agree (together with r >= 0 forced by the unit norm). They are
    planar coordinates of the projected hemisphere with the pole at the
    origin and the complement circle as the unit circle.
    """
    x = np.asarray(x, dtype=float)
    return np.array([float(np.dot(x, circle.f1)), float(np.dot(x, circle.f2))])


def geodesic(p: np.ndarray, q: np.ndarray, t) -> np.ndarray:
    """Point(s) on the minimizing geodesic from p to q at parameter t in [0,1].

    Raises DegenerateGeodesicError for antipodal endpoints.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dot = max(-1.0, min(1.0, float(np.dot(p, q))))
    theta = math.acos(dot)
    if theta > math.pi - 1e-10:
        raise DegenerateGeodesicError("antipodal endpoints admit no unique geodesic")
    t = np.asarray(t, dtype=float)
    if theta < 1e-14:
        out = np.broadcast_to(p, t.shape + (4,)).copy() if t.shape else p.copy()
        return out
    s = math.sin(theta)
    a = np.sin((1.0 - t) * theta) / s
    b = np.sin(t * theta) / s
    return np.multiply.outer(a, p) + np.multiply.outer(b, q)


def geodesic_length(p: np.ndarray, q: np.ndarray) -> float:
    return sphere_distance(np.asarray(p, float), np.asarray(q, float))


def geodesic_midpoint(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if float(np.dot(p, q)) < -1.0 + 1e-12:
        raise DegenerateGeodesicError("antipodal endpoints admit no unique midpoint")
    return unit(p + q)


def arc_distance(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> float:
    """Distance from p to the minimizing geodesic segment from a to b."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    p = np.asarray(p, float)
    circ = GreatCircle.through(a, b)
    foot = circ.projector() @ p
    nf = np.linalg.norm(foot)
    if nf > 1e-12:
        foot = foot / nf
        theta = sphere_distance(a, b)
        if abs(sphere_distance(a, foot) + sphere_distance(foot, b) - theta) < 1e-9:
            return sphere_distance(p, foot)
    return min(sphere_distance(p, a), sphere_distance(p, b))


def intersect_planes(basis1, basis2, tol: float = SUBSPACE_TOL):
    """Orthonormal basis of the intersection of two linear subspaces of R^4,
    each given by a list of orthonormal vectors."""
    p1 = sum(np.outer(v, v) for v in basis1)
    p2 = sum(np.outer(v, v) for v in basis2)
    # x in both subspaces iff both (I - P_i) x = 0
    m = np.vstack([np.eye(4) - p1, np.eye(4) - p2])
    _, svals, vt = np.linalg.svd(m)
    basis = [vt[i] for i in range(4) if (svals[i] if i < len(svals) else 0.0) <= tol]
    return basis


def circle_circle_intersection(c1: GreatCircle, c2: GreatCircle, tol: float = SUBSPACE_TOL):
    """Intersection of two great circles: ('empty', []), ('points', [x, -x])
    or ('equal', [])."""
    basis = intersect_planes([c1.e1, c1.e2], [c2.e1, c2.e2], tol)
    if len(basis) == 0:
        return "empty", []
    if len(basis) == 1:
        x = unit(basis[0])
        return "points", [x, -x]
    return "equal", []


def circle_sphere_intersection(c: GreatCircle, s: GreatSphere, tol: float = SUBSPACE_TOL):
    """('points', [x, -x]) generically, ('contained', []) if the circle lies
    on the sphere."""
    n = s.normal
    p1 = c.projector()
    p2 = np.eye(4) - np.outer(n, n)
    m = np.vstack([np.eye(4) - p1, np.eye(4) - p2])
    _, svals, vt = np.linalg.svd(m)
    basis = [vt[i] for i in range(4) if (svals[i] if i < len(svals) else 0.0) <= tol]
    if len(basis) >= 2:
        return "contained", []
    if len(basis) == 1:
        x = unit(basis[0])
        return "points", [x, -x]
    return "empty", []


def sphere_sphere_intersection(s1: GreatSphere, s2: GreatSphere, tol: float = SUBSPACE_TOL):
    """('circle', GreatCircle) for distinct spheres, ('equal', None) else."""
    if s1.same_sphere(s2, tol):
        return "equal", None
    m = np.vstack([s1.normal, s2.normal])
    _, svals, vt = np.linalg.svd(m, full_matrices=True)
    basis = [vt[i] for i in range(4) if (svals[i] if i < len(svals) else 0.0) <= tol]
    if len(basis) != 2:
        raise GeometryError("unexpected sphere intersection dimension")
    return "circle", GreatCircle(basis[0], basis[1])


def circle_angle_at(c1: GreatCircle, c2: GreatCircle, x: np.ndarray) -> float:
    """Unsigned intersection angle (mod pi, in [0, pi/2]) of two circles at a
    common point."""
    t1 = c1.tangent_at(x)
    t2 = c2.tangent_at(x)
    return math.acos(min(1.0, abs(float(np.dot(t1, t2)))))


def sphere_angle(s1: GreatSphere, s2: GreatSphere) -> float:
    """Dihedral angle between two great spheres, in [0, pi/2]."""
    return math.acos(min(1.0, abs(float(np.dot(s1.normal, s2.normal)))))


EDGES = ((0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3))


class SphericalTetrahedron:
    """Iterated cone over four linearly independent points of S^3.

    Equals the set of unit vectors expressible as nonnegative combinations
    of the vertices, which turns membership into one 4x4 solve.
    """

    __slots__ = ("verts", "_inv")

    def __init__(self, verts):
        verts = np.asarray(verts, dtype=float)
        if verts.shape != (4, 4):
            raise InvalidTetrahedronError("need exactly four 4-vectors")
        vm = verts.T
        try:
            inv = np.linalg.inv(vm)
        except np.linalg.LinAlgError as exc:
            raise InvalidTetrahedronError("vertices are linearly dependent") from exc
        if abs(np.linalg.det(vm)) < 1e-12:
            raise InvalidTetrahedronError("vertices are nearly dependent")
        self.verts = verts
        self._inv = inv

    def coefficients(self, p: np.ndarray) -> np.ndarray:
        """Coefficients c with p = sum c_i * v_i; vectorized over rows."""
        p = np.asarray(p, dtype=float)
        return p @ self._inv.T

    def membership(self, p: np.ndarray, tol: float = MEMBERSHIP_TOL):
        """(inside, coefficients). inside means all coefficients >= -tol."""
        c = self.coefficients(p)
        return bool(np.all(c >= -tol)), c

    def contains(self, pts: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Boolean mask for an (n, 4) array of points."""
        c = self.coefficients(pts)
        return np.all(c >= -tol, axis=-1)

    def margin(self, pts: np.ndarray) -> np.ndarray:
        """Smallest membership coefficient; >= 0 inside, < 0 outside."""
        return np.min(self.coefficients(pts), axis=-1)

    def edge_vertices(self, e: int):
        a, b = EDGES[e]
        return self.verts[a], self.verts[b]

    def edge_length(self, e: int) -> float:
        a, b = self.edge_vertices(e)
        return sphere_distance(a, b)

    def dihedral_angle(self, e: int) -> float:
        """Interior dihedral angle along edge e, measured at its midpoint."""
        (ia, ib) = EDGES[e]
        ic, id_ = (i for i in range(4) if i not in (ia, ib))
        a, b = self.verts[ia], self.verts[ib]
        m = geodesic_midpoint(a, b)
        d = unit(b - float(np.dot(b, m)) * m)

        def in_face_dir(x):
            w = x - float(np.dot(x, m)) * m
            w = w - float(np.dot(w, d)) * d
            return unit(w)

        u = in_face_dir(self.verts[ic])
        v = in_face_dir(self.verts[id_])
        return math.acos(max(-1.0, min(1.0, float(np.dot(u, v)))))

    def centroid(self) -> np.ndarray:
        return unit(self.verts.sum(axis=0))

    def inward_normals(self) -> np.ndarray:
        """Row i is the unit normal of the face opposite vertex i, signed so
        that points of the tetrahedron have nonnegative dot products."""
        out = np.empty((4, 4))
        for i in range(4):
            others = [self.verts[j] for j in range(4) if j != i]
            n = unit(cross4(*others))
            if float(np.dot(n, self.verts[i])) < 0:
                n = -n
            out[i] = n
        return out

    def random_interior_points(self, n: int, rng) -> np.ndarray:
        """Uniform-in-coefficients sample of interior points."""
        c = rng.dirichlet(np.ones(4), size=n)
        pts = c @ self.verts
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)


# -- relation survey for the standard circle pair -----------------------------


def _fold_angle(a: float) -> float:
    """Reduce an angle difference mod pi into [0, pi/2]."""
    a = a % math.pi
    return min(a, math.pi - a)


@dataclass
class RelationsSurvey:
    """Max deviations of the standard circle/sphere incidence identities."""

    residuals: dict
    n_samples: int
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol

    def to_json_dict(self) -> dict:
        return {"residuals": dict(self.residuals),
                "n_samples": self.n_samples, "tol": self.tol,
                "max_residual": self.max_residual, "ok": self.ok}


def basic_relations_survey(n_samples: int = 64, tol: float = 1e-9,
                           rng=None) -> RelationsSurvey:
    """Check the incidence identities tying together a totally orthogonal
    circle pair, the one-parameter families of points and great spheres it
    carries, and the circles joining the two families.

    For each sampled angle tuple: antipode and sphere periodicity; the
    joining circle's orthogonal crossings and quarter-arc decomposition;
    hemisphere cones over the circles; spheres as double cones; the
    sphere-sphere and circle-circle intersection laws with their angles;
    and orthocomplement circles. Returns the worst deviation per item.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    eye = np.eye(4)
    c_low = GreatCircle(eye[0], eye[1])
    c_up = GreatCircle(eye[2], eye[3])

    def p_low(a):
        return c_low.point_at(a)

    def p_up(a):
        return c_up.point_at(a)

    def s_low(a):
        return GreatSphere(-math.sin(a) * eye[0] + math.cos(a) * eye[1])

    def s_up(a):
        return GreatSphere(-math.sin(a) * eye[2] + math.cos(a) * eye[3])

    def join(a, b):
        return GreatCircle.through(p_low(a), p_up(b))

    def sphere_dev(s1, s2):
        return min(float(np.max(np.abs(s1.normal - s2.normal))),
                   float(np.max(np.abs(s1.normal + s2.normal))))

    def circle_dev(k1, k2):
        return float(np.max(np.abs(k1.projector() - k2.projector())))

    def pair_dev(points, x):
        """Distance of the unordered pair {x, -x} from the computed pair."""
        a, b = points
        return max(min(float(np.linalg.norm(a - x)), float(np.linalg.norm(a + x))),
                   min(float(np.linalg.norm(b - x)), float(np.linalg.norm(b + x))))

    r = {f"{key}": 0.0 for key in
         ("antipodes", "crossings", "quarter_arcs", "hemisphere_cones",
          "sphere_double_cones", "sphere_pair_circle", "orthocomplement",
          "same_family_spheres", "joining_circle_pairs")}

    def bump(key, value):
        r[key] = max(r[key], float(value))

    half_pi = math.pi / 2
    for _ in range(n_samples):
        while True:
            a1, b1, a2, b2 = rng.uniform(0.0, 2 * math.pi, size=4)
            if (_fold_angle(a1 - a2) > 1e-3 and _fold_angle(b1 - b2) > 1e-3
                    and _fold_angle(a1 - b1) > 1e-3):
                break

        # periodicity by half a turn: points flip, spheres repeat
        bump("antipodes", np.max(np.abs(p_low(a1 + math.pi) + p_low(a1))))
        bump("antipodes", np.max(np.abs(p_up(b1 + math.pi) + p_up(b1))))
        bump("antipodes", sphere_dev(s_low(a1 + math.pi), s_low(a1)))
        bump("antipodes", sphere_dev(s_up(b1 + math.pi), s_up(b1)))

        # the joining circle meets both base circles orthogonally in
        # antipodal pairs
        k1 = join(a1, b1)
        kind, pts = circle_circle_intersection(k1, c_low)
        bump("crossings", math.inf if kind != "points" else pair_dev(pts, p_low(a1)))
        bump("crossings", abs(circle_angle_at(k1, c_low, p_low(a1)) - half_pi))
        kind, pts = circle_circle_intersection(k1, c_up)
        bump("crossings", math.inf if kind != "points" else pair_dev(pts, p_up(b1)))
        bump("crossings", abs(circle_angle_at(k1, c_up, p_up(b1)) - half_pi))

        # quarter-arc decomposition of the joining circle
        cycle = [p_low(a1), p_up(b1), -p_low(a1), -p_up(b1)]
        for q in range(4):
            u, v = cycle[q], cycle[(q + 1) % 4]
            bump("quarter_arcs", abs(sphere_distance(u, v) - half_pi))
            bump("quarter_arcs", k1.distance(geodesic_midpoint(u, v)))

        # cones over a base circle with an orthogonal pole are hemispheres
        for base, pole in ((c_low, p_up(b1)), (c_up, p_low(a1))):
            sphere = GreatSphere.through(base, pole)
            t, th = rng.uniform(0.0, half_pi), rng.uniform(0.0, 2 * math.pi)
            x = math.cos(t) * base.point_at(th) + math.sin(t) * pole
            bump("hemisphere_cones", sphere.distance(x))
            bump("hemisphere_cones", max(0.0, -float(np.dot(x, pole))))
            # every point of the hemisphere decomposes back into the cone
            y = x / np.linalg.norm(x)
            q = base.projector() @ y
            h = float(np.dot(y, pole))
            rec = q + h * pole
            bump("hemisphere_cones", np.max(np.abs(rec - y)))

        # each sphere of a family is the union of two opposite cones
        for sphere, base, pole in ((s_low(a1), c_up, p_low(a1)),
                                   (s_up(b1), c_low, p_up(b1))):
            w = rng.normal(size=3)
            w /= np.linalg.norm(w)
            basis = [base.e1, base.e2, pole]
            y = sum(float(wc) * bv for wc, bv in zip(w, basis))
            bump("sphere_double_cones", sphere.distance(y))
            q = base.projector() @ y
            h = float(np.dot(y, pole))
            bump("sphere_double_cones", np.max(np.abs(q + h * pole - y)))
            # and meets its base-opposite circle orthogonally at the poles
            other = c_low if base is c_up else c_up
            kind, pts = circle_sphere_intersection(other, sphere)
            bump("sphere_double_cones",
                 math.inf if kind != "points" else pair_dev(pts, pole))
            tangent = other.tangent_at(pole)
            bump("sphere_double_cones",
                 abs(abs(float(np.dot(tangent, sphere.normal))) - 1.0))

        # one sphere from each family meets in the joining circle, at a
        # right angle
        kind, circ = sphere_sphere_intersection(s_low(a1), s_up(b1))
        bump("sphere_pair_circle",
             math.inf if kind != "circle" else circle_dev(circ, k1))
        bump("sphere_pair_circle", abs(sphere_angle(s_low(a1), s_up(b1)) - half_pi))

        # orthocomplement shifts both parameters by a quarter turn
        bump("orthocomplement",
             circle_dev(k1.orthocomplement(), join(a1 + half_pi, b1 + half_pi)))

        # two spheres of the same family meet exactly in the base circle
        for sa, sb, base, d in ((s_up(a1), s_up(a2), c_low, a2 - a1),
                                (s_low(b1), s_low(b2), c_up, b2 - b1)):
            kind, circ = sphere_sphere_intersection(sa, sb)
            bump("same_family_spheres",
                 math.inf if kind != "circle" else circle_dev(circ, base))
            bump("same_family_spheres",
                 abs(sphere_angle(sa, sb) - _fold_angle(d)))

        # joining circles: disjoint generically; a shared lower angle gives
        # two antipodal meeting points on the lower circle, and similarly
        # for a shared upper angle; both shared means equal circles
        kind, _ = circle_circle_intersection(k1, join(a2, b2))
        bump("joining_circle_pairs", 0.0 if kind == "empty" else math.inf)
        bump("joining_circle_pairs", circle_dev(k1, join(a1 + math.pi, b1)))
        bump("joining_circle_pairs", circle_dev(k1, join(a1 + math.pi, b1 + math.pi)))
        k2 = join(a1, b2)
        kind, pts = circle_circle_intersection(k1, k2)
        bump("joining_circle_pairs",
             math.inf if kind != "points" else pair_dev(pts, p_low(a1)))
        bump("joining_circle_pairs",
             abs(circle_angle_at(k1, k2, p_low(a1)) - _fold_angle(b2 - b1)))
        k3 = join(a2, b1 + math.pi)
        kind, pts = circle_circle_intersection(k1, k3)
        bump("joining_circle_pairs",
             math.inf if kind != "points" else pair_dev(pts, p_up(b1)))
        bump("joining_circle_pairs",
             abs(circle_angle_at(k1, k3, p_up(b1)) - _fold_angle(a2 - a1)))

    return RelationsSurvey(residuals=r, n_samples=n_samples, tol=tol)
