"""The (m, k) lattice on S^3 and its tetrahedral tessellations.

Two orthogonal oriented great circles carry m-th and k-th division points;
cones over quadruples of those points tile the sphere with 4km congruent
tetrahedra in four overlapping families. Indices live on the half-integer
grid and are kept exact (Fractions), so aliasing identities like
t[i + m] = -t[i] are decided by arithmetic, not by float comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .angles import Angle, half_integer
from . import s3
from .s3 import (
    GreatCircle,
    GreatSphere,
    SphericalTetrahedron,
    geodesic,
    unit,
)

FAMILIES = ("int", "half", "even", "odd")

HALF = Fraction(1, 2)


class UnsupportedParametersError(ValueError):
    pass


class InvalidIndexError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CellIndex:
    family: str
    i: Fraction
    j: Fraction

    def __str__(self):
        return f"{self.family}({self.i},{self.j})"


@dataclass(frozen=True)
class LawsonQuad:
    """Closed boundary quadrilateral of a cell: four quarter-circle arcs
    between alternating lower/upper lattice points, in cyclic order."""

    corners: np.ndarray  # (4, 4), cyclic order

    def arc_endpoints(self, a: int):
        return self.corners[a % 4], self.corners[(a + 1) % 4]

    def arc_point(self, a: int, t: float) -> np.ndarray:
        p, q = self.arc_endpoints(a)
        return geodesic(p, q, t)

    def sample(self, per_arc: int) -> np.ndarray:
        """Closed polyline with per_arc points per arc (corner included once)."""
        ts = np.arange(per_arc) / per_arc
        pts = [self.arc_point(a, t) for a in range(4) for t in ts]
        return np.asarray(pts)


@dataclass(frozen=True)
class BoundaryParts:
    """The two-triangle halves of a cell boundary and their common quad."""

    plus_triangles: tuple  # two (3, 4) vertex arrays, on lower-family spheres
    minus_triangles: tuple  # two (3, 4) vertex arrays, on upper-family spheres
    quad: LawsonQuad


class Lattice:
    """Lattice data for parameters m >= 3, k >= 2."""

    def __init__(self, m: int, k: int):
        if int(m) != m or int(k) != k or m < 3 or k < 2:
            raise UnsupportedParametersError(
                f"need integers m >= 3 and k >= 2, got m={m!r} k={k!r}")
        self.m = int(m)
        self.k = int(k)
        e = np.eye(4)
        self.circle_lower = GreatCircle(e[0], e[1])
        self.circle_upper = GreatCircle(e[2], e[3])

    # -- lattice points, spheres, circles ---------------------------------

    def angle_lower(self, i) -> Angle:
        return Angle(half_integer(i) / self.m)

    def angle_upper(self, j) -> Angle:
        return Angle(half_integer(j) / self.k)

    def t_lower(self, i) -> np.ndarray:
        a = self.angle_lower(i)
        return np.array([a.cos(), a.sin(), 0.0, 0.0])

    def t_upper(self, j) -> np.ndarray:
        a = self.angle_upper(j)
        return np.array([0.0, 0.0, a.cos(), a.sin()])

    def sigma_lower(self, i) -> GreatSphere:
        """Great sphere through the upper circle and t_lower(i)."""
        a = self.angle_lower(i)
        return GreatSphere(np.array([-a.sin(), a.cos(), 0.0, 0.0]))

    def sigma_upper(self, j) -> GreatSphere:
        a = self.angle_upper(j)
        return GreatSphere(np.array([0.0, 0.0, -a.sin(), a.cos()]))

    def circle(self, i, j) -> GreatCircle:
        """Great circle through t_lower(i) and t_upper(j), oriented that way."""
        return GreatCircle(self.t_lower(i), self.t_upper(j))

    def spheres(self):
        """The k + m distinct lattice spheres with exact identity keys."""
        out = []
        for j in range(self.k):
            out.append((("upper", Fraction(j)), self.sigma_upper(j)))
        for i in range(self.m):
            out.append((("lower", Fraction(i)), self.sigma_lower(i)))
        return out

    def circles_quad(self):
        """The km distinct circles through half-grid point pairs (these lie
        on the assembled surface)."""
        return [((i, j), self.circle(i, j))
                for i in [HALF + n for n in range(self.m)]
                for j in [HALF + n for n in range(self.k)]]

    def circles_axes(self):
        """The km distinct circles through integer-grid point pairs (cell
        axes of the integer family)."""
        return [((Fraction(i), Fraction(j)), self.circle(i, j))
                for i in range(self.m) for j in range(self.k)]

    # -- cells -------------------------------------------------------------

    def cell(self, family: str, i, j) -> CellIndex:
        if family not in FAMILIES:
            raise InvalidIndexError(f"unknown family {family!r}")
        i = half_integer(i) % (2 * self.m)
        j = half_integer(j) % (2 * self.k)
        if family == "half":
            if i.denominator != 2 or j.denominator != 2:
                raise InvalidIndexError(
                    f"family 'half' needs half-integer indices, got ({i},{j})")
        else:
            if i.denominator != 1 or j.denominator != 1:
                raise InvalidIndexError(
                    f"family {family!r} needs integer indices, got ({i},{j})")
            if family == "even" and (i + j) % 2 != 0:
                raise InvalidIndexError(f"({i},{j}) has odd index sum")
            if family == "odd" and (i + j) % 2 != 1:
                raise InvalidIndexError(f"({i},{j}) has even index sum")
        return CellIndex(family, i, j)

    def cells(self, family: str):
        m2, k2 = 2 * self.m, 2 * self.k
        if family == "int":
            pairs = [(Fraction(a), Fraction(b)) for a in range(m2) for b in range(k2)]
        elif family == "half":
            pairs = [(Fraction(a) + HALF, Fraction(b) + HALF)
                     for a in range(m2) for b in range(k2)]
        elif family == "even":
            pairs = [(Fraction(a), Fraction(b))
                     for a in range(m2) for b in range(k2) if (a + b) % 2 == 0]
        elif family == "odd":
            pairs = [(Fraction(a), Fraction(b))
                     for a in range(m2) for b in range(k2) if (a + b) % 2 == 1]
        else:
            raise InvalidIndexError(f"unknown family {family!r}")
        return [CellIndex(family, i, j) for i, j in pairs]

    def tetra(self, idx: CellIndex) -> SphericalTetrahedron:
        """Cell tetrahedron; vertex order (t[i-1/2], t[i+1/2], t^[j-1/2],
        t^[j+1/2]) so edge 0 lies on the lower circle and edge 1 on the
        upper circle."""
        i, j = idx.i, idx.j
        return SphericalTetrahedron([
            self.t_lower(i - HALF), self.t_lower(i + HALF),
            self.t_upper(j - HALF), self.t_upper(j + HALF)])

    def quarter_cell(self, i, j, si: int, sj: int) -> SphericalTetrahedron:
        """Quarter of the (i, j) cell cut by both bisecting spheres;
        si, sj in {+1, -1} select the quadrant."""
        i, j = half_integer(i), half_integer(j)
        return SphericalTetrahedron([
            self.t_lower(i), self.t_lower(i + si * HALF),
            self.t_upper(j), self.t_upper(j + sj * HALF)])

    def half_cell_lower(self, i, si: int, j) -> SphericalTetrahedron:
        """Half cell cut by the lower bisecting sphere only."""
        i, j = half_integer(i), half_integer(j)
        return SphericalTetrahedron([
            self.t_lower(i), self.t_lower(i + si * HALF),
            self.t_upper(j - HALF), self.t_upper(j + HALF)])

    def half_cell_upper(self, i, j, sj: int) -> SphericalTetrahedron:
        """Half cell cut by the upper bisecting sphere only."""
        i, j = half_integer(i), half_integer(j)
        return SphericalTetrahedron([
            self.t_lower(i - HALF), self.t_lower(i + HALF),
            self.t_upper(j), self.t_upper(j + sj * HALF)])

    def axis(self, idx: CellIndex) -> GreatCircle:
        """Axis circle of a cell: through t_lower(i) and t_upper(j)."""
        return self.circle(idx.i, idx.j)

    def cell_group(self, i, j):
        """Klein four-group fixing the (i, j) cell: identity, the two
        bisecting-sphere reflections, and the axis half-turn."""
        ident = np.eye(4)
        rl = self.sigma_lower(i).reflection()
        ru = self.sigma_upper(j).reflection()
        rc = self.circle(i, j).reflection()
        return [ident, rl, ru, rc]

    def cell_group_hat(self, i, j):
        """Order-two subgroup generated by the axis half-turn."""
        return [np.eye(4), self.circle(i, j).reflection()]

    # -- membership / location ---------------------------------------------

    def locate(self, p: np.ndarray, family: str, tol: float = s3.MEMBERSHIP_TOL):
        """All cells of the family containing p (closed cells)."""
        return [idx for idx in self.cells(family)
                if self.tetra(idx).membership(p, tol)[0]]

    def coverage_counts(self, pts: np.ndarray, family: str,
                        tol: float = s3.MEMBERSHIP_TOL) -> np.ndarray:
        """For each point, in how many closed cells of the family it lies."""
        counts = np.zeros(len(pts), dtype=int)
        for idx in self.cells(family):
            counts += self.tetra(idx).contains(pts, tol)
        return counts

    # -- boundary structure --------------------------------------------------

    def boundary_parts(self, idx: CellIndex) -> BoundaryParts:
        i, j = idx.i, idx.j
        tl0, tl1 = self.t_lower(i - HALF), self.t_lower(i + HALF)
        tu0, tu1 = self.t_upper(j - HALF), self.t_upper(j + HALF)
        plus = (np.array([tl0, tu0, tu1]), np.array([tl1, tu0, tu1]))
        minus = (np.array([tl0, tl1, tu0]), np.array([tl0, tl1, tu1]))
        quad = LawsonQuad(corners=np.array([tl0, tu0, tl1, tu1]))
        return BoundaryParts(plus_triangles=plus, minus_triangles=minus, quad=quad)

    def face_planes(self, idx: CellIndex):
        """(normal, part) for the four face spheres of a cell; part is
        'plus' for faces on lower-family spheres, 'minus' for faces on
        upper-family spheres."""
        i, j = idx.i, idx.j
        return [
            (self.sigma_lower(i - HALF).normal, "plus"),
            (self.sigma_lower(i + HALF).normal, "plus"),
            (self.sigma_upper(j - HALF).normal, "minus"),
            (self.sigma_upper(j + HALF).normal, "minus"),
        ]

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        def vec(v):
            return [float(x) for x in v]

        return {
            "m": self.m,
            "k": self.k,
            "points": {
                "lower": [{"i": str(HALF * n), "x": vec(self.t_lower(HALF * n))}
                          for n in range(4 * self.m)],
                "upper": [{"j": str(HALF * n), "x": vec(self.t_upper(HALF * n))}
                          for n in range(4 * self.k)],
            },
            "spheres": [{"key": f"{key[0]}:{key[1]}", "normal": vec(s.normal)}
                        for key, s in self.spheres()],
            "circles": {
                "quad": [{"i": str(i), "j": str(j),
                          "e1": vec(c.e1), "e2": vec(c.e2)}
                         for (i, j), c in self.circles_quad()],
                "axes": [{"i": str(i), "j": str(j),
                          "e1": vec(c.e1), "e2": vec(c.e2)}
                         for (i, j), c in self.circles_axes()],
            },
            "cells": {fam: [[str(c.i), str(c.j)] for c in self.cells(fam)]
                      for fam in FAMILIES},
        }


def cell_metrics(lat: Lattice, idx: CellIndex) -> dict:
    """Edge lengths and interior dihedral angles in canonical edge order
    (edge 0 on the lower circle, edge 1 on the upper circle)."""
    tet = lat.tetra(idx)
    return {
        "lengths": [tet.edge_length(e) for e in range(6)],
        "dihedrals": [tet.dihedral_angle(e) for e in range(6)],
    }


def expected_metrics(lat: Lattice) -> dict:
    pm, pk, p2 = math.pi / lat.m, math.pi / lat.k, math.pi / 2
    return {
        "lengths": [pm, pk, p2, p2, p2, p2],
        "dihedrals": [pk, pm, p2, p2, p2, p2],
    }


# -- axis rotation / orbit survey -------------------------------------------


@dataclass
class OrbitSurvey:
    """Sampling survey of the rotation flow along a cell's axis circle."""

    separation_ok: bool = True
    contact_plus: list = field(default_factory=list)
    contact_minus: list = field(default_factory=list)
    quarters_ok: bool = True
    orbit_count: int = 0
    single_arc_ok: bool = True
    crossing_counts_ok: bool = True
    transversal_ok: bool = True
    quad_contact_ok: bool = True
    winding: int = 0
    pole_inside: bool = True
    min_crossing_rate: float = math.inf
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.separation_ok and self.quarters_ok and self.single_arc_ok
                and self.crossing_counts_ok and self.transversal_ok
                and self.quad_contact_ok and abs(self.winding) == 1
                and self.pole_inside)


def _orbit_points(x: np.ndarray, axis: GreatCircle, thetas: np.ndarray) -> np.ndarray:
    """Points of the rotation orbit along `axis` through x at the given
    angles, vectorized."""
    a = float(np.dot(x, axis.e1))
    b = float(np.dot(x, axis.e2))
    rest = x - a * axis.e1 - b * axis.e2
    ca, sa = np.cos(thetas), np.sin(thetas)
    return (np.outer(a * ca - b * sa, axis.e1)
            + np.outer(a * sa + b * ca, axis.e2)
            + rest)


def _orbit_point(x: np.ndarray, axis: GreatCircle, theta: float) -> np.ndarray:
    return _orbit_points(x, axis, np.array([theta]))[0]


def axis_rotation_survey(lat: Lattice, idx: CellIndex, n_orbits: int = 256,
                         n_theta: int = 512, rng=None) -> OrbitSurvey:
    """Check, by dense sampling, how the rotation flow along a cell's axis
    interacts with the cell: rotated copies at angles in (pi/2, 3pi/2) are
    disjoint from the cell with single-vertex contact at +-pi/2; each orbit
    crosses the cell in one connected arc entering through one boundary half
    and leaving through the other, transversally; orbits through the boundary
    quad touch the cell exactly once; and the projected boundary quad winds
    once around the projected axis pole."""
    if rng is None:
        rng = np.random.default_rng(0)
    survey = OrbitSurvey()
    tet = lat.tetra(idx)
    axis = lat.axis(idx)
    planes = lat.face_planes(idx)
    gen = s3.killing_generator_along(axis)

    # (i) separation for rotation angles strictly between pi/2 and 3pi/2
    pts = tet.random_interior_points(512, rng)
    for t in np.linspace(math.pi / 2 + 1e-3, 3 * math.pi / 2 - 1e-3, 9):
        moved = pts @ s3.rotate_along(axis, float(t)).T
        if np.any(tet.margin(moved) >= -1e-9):
            survey.separation_ok = False
            survey.failures.append(("separation", float(t)))
            break

    # contact candidates at +-pi/2: the two axis poles
    for t, store in ((math.pi / 2, survey.contact_plus),
                     (-math.pi / 2, survey.contact_minus)):
        rot = s3.rotate_along(axis, t)
        for name, c in (("t_lower", lat.t_lower(idx.i)), ("t_upper", lat.t_upper(idx.j))):
            back = rot.T @ c
            if tet.margin(c[None, :])[0] >= -1e-9 and tet.margin(back[None, :])[0] >= -1e-9:
                store.append(name)
        moved = pts @ rot.T
        if np.any(tet.margin(moved) >= -1e-9):
            survey.separation_ok = False
            survey.failures.append(("contact-interior-overlap", float(t)))

    quarters = [lat.quarter_cell(idx.i, idx.j, si, sj)
                for si in (+1, -1) for sj in (+1, -1)]
    thetas = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)

    # interior points kept clear of the boundary so crossings stay generic
    inner = tet.random_interior_points(8 * n_orbits, rng)
    inner = inner[tet.margin(inner) >= 1e-3][:n_orbits]
    survey.orbit_count = len(inner)
    for x in inner:
        orb = _orbit_points(x, axis, thetas)
        inside = tet.margin(orb) >= -s3.MEMBERSHIP_TOL
        runs = _circular_runs(inside)
        if len(runs) != 1:
            survey.single_arc_ok = False
            survey.failures.append(("runs", len(runs)))
            continue
        # (ii) the in-cell arc lies in exactly one closed quarter cell
        arc = orb[inside]
        hits = [np.count_nonzero(q.margin(arc) >= -1e-9) for q in quarters]
        if not all(h in (0, len(arc)) for h in hits) or not any(h == len(arc) for h in hits):
            survey.quarters_ok = False
            survey.failures.append(("quarters", hits))
        # (iii) refine the two boundary crossings and classify them
        parts = []
        degenerate = False
        for lo, hi in _run_brackets(runs[0], thetas):
            theta_star = _bisect_margin(x, axis, tet, lo, hi)
            y = _orbit_point(x, axis, theta_star)
            vals = sorted((abs(float(np.dot(y, n))), part) for n, part in planes)
            if vals[1][0] < 1e-6:
                degenerate = True  # crossing lands on a cell edge; not generic
                break
            parts.append(vals[0][1])
            n_face = next(n for n, part in planes
                          if abs(float(np.dot(y, n))) == vals[0][0])
            rate = abs(float(np.dot(gen @ y, n_face)))
            survey.min_crossing_rate = min(survey.min_crossing_rate, rate)
            if rate < 1e-6:
                survey.transversal_ok = False
                survey.failures.append(("tangent-crossing", rate))
        if not degenerate and sorted(parts) != ["minus", "plus"]:
            survey.crossing_counts_ok = False
            survey.failures.append(("crossing-parts", parts))

    # (iv) orbits through the quad touch the closed cell exactly once
    quad = lat.boundary_parts(idx).quad
    n_quad = max(16, n_orbits // 4)
    for a in range(4):
        for t in rng.uniform(0.05, 0.95, size=n_quad // 4):
            q = quad.arc_point(a, float(t))
            if tet.margin(q[None, :])[0] < -1e-9:
                survey.quad_contact_ok = False
                survey.failures.append(("quad-off-cell", a))
                continue
            away = thetas[(thetas > 1e-3) & (thetas < 2 * math.pi - 1e-3)]
            orb = _orbit_points(q, axis, away)
            if np.any(tet.margin(orb) >= -1e-8):
                survey.quad_contact_ok = False
                survey.failures.append(("quad-second-contact", a, float(t)))

    # (vi) projected quad winds once around the projected pole
    poly = quad.sample(128)
    coords = np.stack([s3.orbit_disc_coords(axis, p) for p in poly])
    survey.pole_inside = bool(np.min(np.linalg.norm(coords, axis=1)) > 1e-6)
    ang = np.arctan2(coords[:, 1], coords[:, 0])
    dang = np.diff(ang, append=ang[:1])
    dang = (dang + math.pi) % (2 * math.pi) - math.pi
    survey.winding = int(round(float(np.sum(dang) / (2 * math.pi))))
    return survey


def _circular_runs(mask: np.ndarray):
    """Maximal runs of True in a cyclic boolean array, as index lists."""
    n = len(mask)
    if mask.all():
        return [list(range(n))]
    if not mask.any():
        return []
    runs = []
    idx = np.flatnonzero(mask)
    # walk from a False position so runs do not wrap
    start = int(np.flatnonzero(~mask)[0])
    cur = []
    for off in range(1, n + 1):
        p = (start + off) % n
        if mask[p]:
            cur.append(p)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def _run_brackets(run, thetas):
    """Bracketing (inside, outside) angle pairs at both ends of a run.
    Angles are left unwrapped; the orbit map is 2*pi-periodic."""
    n = len(thetas)
    step = 2 * math.pi / n
    first, last = run[0], run[-1]
    return (
        (thetas[first], thetas[first] - step),
        (thetas[last], thetas[last] + step),
    )


def _bisect_margin(x, axis, tet, lo, hi, iters: int = 60) -> float:
    """Root of the membership margin along the orbit, between an inside
    angle lo and an outside angle hi."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if tet.margin(_orbit_point(x, axis, mid)[None, :])[0] >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
