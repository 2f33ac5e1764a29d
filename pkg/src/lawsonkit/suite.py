"""Verification suite: named property checks over the whole pipeline.

Each check exercises one verifiable claim about the construction, from the
geometry kernel up to the assembled closed surface. Checks are grouped and
ordered by data dependency (geometry, lattice, group, orbit, disc, surface);
expensive artifacts (the lattice, the named groups, the solved disc, the
welded surface) are built once per run and shared.

Reports are deliberately timing-free and fully deterministic: a fixed
config and seed produce byte-identical JSON. Randomized checks derive their
generator from the run seed and the check name, so adding or reordering
checks never shifts another check's stream. The generator is numpy's
default PCG64.
"""

from __future__ import annotations

import math
import tempfile
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import objio, plateau, s3, surface
from .groups import act, build_named_groups, exchange_extension
from .lattice import (HALF, Lattice, UnsupportedParametersError,
                      axis_rotation_survey, cell_metrics, expected_metrics)

MC_COVERAGE_POINTS = 100_000
ORBIT_SAMPLES = 256
GRAPHICALITY_ORBITS = 512
UMBILIC_SAMPLES = 1000


class ConfigError(ValueError):
    pass


class CheckFailed(Exception):
    def __init__(self, residual: float, witness: str):
        super().__init__(witness)
        self.residual = residual
        self.witness = witness


class SkipCheck(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one verification run."""

    m: int = 3
    k: int = 2
    level: int = 5
    tol_grad: float = 1e-10
    tol_sym: float = 1e-10
    out_dir: str = "."
    seed: int = 0

    def validate(self) -> "RunConfig":
        if int(self.m) != self.m or self.m < 3:
            raise ConfigError(f"m must be an integer >= 3, got {self.m!r}")
        if int(self.k) != self.k or self.k < 2:
            raise ConfigError(f"k must be an integer >= 2, got {self.k!r}")
        if int(self.level) != self.level or self.level < 2:
            raise ConfigError(f"level must be an integer >= 2, got {self.level!r}")
        if not (0 < self.tol_grad < 1):
            raise ConfigError(f"tol_grad out of range: {self.tol_grad!r}")
        if not (0 < self.tol_sym < 1):
            raise ConfigError(f"tol_sym out of range: {self.tol_sym!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        return self

    def to_json_dict(self) -> dict:
        return {"m": self.m, "k": self.k, "level": self.level,
                "tol_grad": self.tol_grad, "tol_sym": self.tol_sym,
                "out_dir": self.out_dir, "seed": self.seed}


@dataclass
class CheckResult:
    name: str
    group: str
    status: str                    # "pass" | "fail" | "skip"
    residual: float | None = None
    witness: str | None = None
    reason: str | None = None      # required when status == "skip"

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SuiteReport:
    config: RunConfig
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for r in self.results:
            out[r.status] += 1
        return out

    def to_json_dict(self) -> dict:
        return {"config": self.config.to_json_dict(),
                "counts": self.counts(),
                "ok": self.ok,
                "results": [r.to_json_dict() for r in self.results]}


class RunContext:
    """Shared artifacts for one run, built lazily in dependency order."""

    def __init__(self, config: RunConfig):
        self.config = config.validate()

    def rng_for(self, name: str):
        return np.random.default_rng(
            [self.config.seed, zlib.crc32(name.encode())])

    @cached_property
    def lattice(self) -> Lattice:
        return Lattice(self.config.m, self.config.k)

    @cached_property
    def named(self):
        return build_named_groups(self.lattice)

    @cached_property
    def orbit_survey(self):
        idx = self.lattice.cell("int", 0, 0)
        return axis_rotation_survey(self.lattice, idx,
                                    n_orbits=ORBIT_SAMPLES,
                                    rng=self.rng_for("axis-orbit"))

    @cached_property
    def disc_out(self) -> dict:
        opts = plateau.SolverOptions(
            level=self.config.level, grad_tol=self.config.tol_grad,
            sym_tol=self.config.tol_sym)
        return plateau.solve_disc(self.lattice, self.config.level, opts)

    @property
    def disc_mesh(self) -> plateau.TriMeshS3:
        return self.disc_out[self.config.level][0]

    @property
    def disc_report(self) -> plateau.DiscReport:
        return self.disc_out[self.config.level][1]

    @cached_property
    def surf(self) -> surface.ClosedSurfaceMesh:
        return surface.assemble(self.lattice, self.disc_mesh)

    @cached_property
    def surf_topology(self):
        return surface.topology(self.surf)

    @cached_property
    def surf_ledger(self):
        return surface.ledger(self.surf, self.lattice)

    @cached_property
    def surf_symmetry(self):
        return surface.symmetry_check(self.surf, self.named.full)


# -- geometry checks -----------------------------------------------------------


def check_circle_frames(ctx: RunContext):
    """Random circles carry positively oriented orthonormal 4-frames, and
    rotations about/along them are special orthogonal with the right fixed
    sets."""
    rng = ctx.rng_for("circle-frames")
    worst = 0.0
    for _ in range(32):
        a = rng.normal(size=4)
        b = rng.normal(size=4)
        c = s3.GreatCircle.through(s3.unit(a), s3.unit(b - a * (a @ b) / (a @ a)))
        frame = np.stack([c.e1, c.e2, c.f1, c.f2])
        worst = max(worst, float(np.max(np.abs(frame @ frame.T - np.eye(4)))))
        worst = max(worst, abs(float(np.linalg.det(frame.T)) - 1.0))
        phi = float(rng.uniform(0, 2 * math.pi))
        for rot, fixed in ((s3.rotate_about(c, phi), (c.e1, c.e2)),
                           (s3.rotate_along(c, phi), (c.f1, c.f2))):
            worst = max(worst, float(np.max(np.abs(rot @ rot.T - np.eye(4)))))
            worst = max(worst, abs(float(np.linalg.det(rot)) - 1.0))
            for v in fixed:
                worst = max(worst, float(np.max(np.abs(rot @ v - v))))
    if worst > 1e-10:
        raise CheckFailed(worst, "frame or rotation deviation above 1e-10")
    return worst, None


def check_orbit_projection(ctx: RunContext):
    """Projection along a circle's rotation flow is constant on orbits and
    lands on the orbit of the pole."""
    rng = ctx.rng_for("killing-orbit-projection")
    worst = 0.0
    for _ in range(32):
        c = s3.GreatCircle(*_random_frame(rng)[:2])
        pole = c.point_at(float(rng.uniform(0, 2 * math.pi)))
        x = s3.unit(rng.normal(size=4))
        p0 = s3.orbit_project(c, pole, x)
        for phi in rng.uniform(0, 2 * math.pi, size=4):
            moved = s3.rotate_along(c, float(phi)) @ x
            worst = max(worst, float(np.max(np.abs(
                s3.orbit_project(c, pole, moved) - p0))))
        # the projection preserves the orbit invariants
        d0 = s3.orbit_disc_coords(c, x)
        d1 = s3.orbit_disc_coords(c, p0)
        worst = max(worst, float(np.max(np.abs(d0 - d1))))
    if worst > 1e-10:
        raise CheckFailed(worst, "orbit projection varies along an orbit")
    return worst, None


def _random_frame(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    return [q[:, i] for i in range(4)]


def check_geodesics(ctx: RunContext):
    """Geodesic endpoints, midpoint equidistance, and arc-distance zero on
    the arc."""
    rng = ctx.rng_for("geodesic-arcs")
    worst = 0.0
    for _ in range(64):
        p = s3.unit(rng.normal(size=4))
        q = s3.unit(rng.normal(size=4))
        if abs(float(p @ q)) > 0.99:
            continue
        worst = max(worst, float(np.max(np.abs(s3.geodesic(p, q, 0.0) - p))))
        worst = max(worst, float(np.max(np.abs(s3.geodesic(p, q, 1.0) - q))))
        mid = s3.geodesic_midpoint(p, q)
        worst = max(worst, abs(s3.sphere_distance(p, mid) - s3.sphere_distance(mid, q)))
        t = float(rng.uniform(0.1, 0.9))
        worst = max(worst, s3.arc_distance(p, q, s3.geodesic(p, q, t)))
    if worst > 1e-10:
        raise CheckFailed(worst, "geodesic identity broken")
    return worst, None


def check_circle_sphere_relations(ctx: RunContext):
    """The nine incidence identities of the standard orthogonal circle pair,
    sampled at 64 angle tuples."""
    survey = s3.basic_relations_survey(
        n_samples=64, tol=1e-9, rng=ctx.rng_for("circle-sphere-relations"))
    if not survey.ok:
        bad = max(survey.residuals, key=survey.residuals.get)
        raise CheckFailed(survey.max_residual, f"worst item: {bad}")
    return survey.max_residual, None


# -- lattice checks ------------------------------------------------------------


def check_cell_metrics(ctx: RunContext):
    """Every integer-family cell has edge lengths {pi/m, pi/k, pi/2 x4} and
    dihedral angles {pi/k, pi/m, pi/2 x4} in canonical edge order."""
    lat = ctx.lattice
    want = expected_metrics(lat)
    worst = 0.0
    for idx in lat.cells("int") + lat.cells("half"):
        got = cell_metrics(lat, idx)
        worst = max(worst, max(abs(a - b) for a, b in
                               zip(got["lengths"], want["lengths"])))
        worst = max(worst, max(abs(a - b) for a, b in
                               zip(got["dihedrals"], want["dihedrals"])))
    if worst > 1e-12:
        raise CheckFailed(worst, "cell metric off the exact pattern")
    return worst, None


def check_coverage(ctx: RunContext):
    """Monte-Carlo multiplicity-one coverage of the three-sphere by each
    tessellation family."""
    lat = ctx.lattice
    rng = ctx.rng_for("coverage-multiplicity")
    pts = rng.normal(size=(MC_COVERAGE_POINTS, 4))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    bad = 0
    for fam in ("int", "half"):
        strict = lat.coverage_counts(pts, fam, tol=-1e-9)
        loose = lat.coverage_counts(pts, fam, tol=1e-9)
        bad += int(np.count_nonzero((strict > 1) | (loose < 1)))
    if bad:
        raise CheckFailed(float(bad), f"{bad} points with wrong multiplicity")
    return 0.0, f"{MC_COVERAGE_POINTS} points x 2 families"


def check_boundary_quads(ctx: RunContext):
    """Quad arcs are quarter circles joining the right lattice points, and
    each cell's quad lies on the cell boundary."""
    lat = ctx.lattice
    worst = 0.0
    for idx in lat.cells("int"):
        parts = lat.boundary_parts(idx)
        quad = parts.quad
        tet = lat.tetra(idx)
        for a in range(4):
            u, v = quad.arc_endpoints(a)
            worst = max(worst, abs(s3.sphere_distance(u, v) - math.pi / 2))
        sample = quad.sample(32)
        worst = max(worst, float(np.max(np.abs(tet.margin(sample)))))
    if worst > 1e-9:
        raise CheckFailed(worst, "quad arc deviates from the cell boundary")
    return worst, None


# -- group checks ---------------------------------------------------------------


def check_group_orders(ctx: RunContext):
    """Exact orders: full 8km; sphere, circle and orientation subgroups 4km;
    quad and axis half-turn subgroups 2km."""
    ng = ctx.named
    m, k = ctx.config.m, ctx.config.k
    want = {
        "full": 8 * k * m,
        "sphere-reflections": 4 * k * m,
        "circle-half-turns": 4 * k * m,
        "orientation-preserving": 4 * k * m,
        "quad-half-turns": 2 * k * m,
        "axis-half-turns": 2 * k * m,
    }
    got = {g.name: g.order for g in ng.all_named()}
    if got != want:
        raise CheckFailed(float("nan"), f"orders {got} != {want}")
    for g in ng.all_named():
        if g.name != "full" and not g.is_subgroup_of(ng.full):
            raise CheckFailed(float("nan"), f"{g.name} not inside the full group")
    return 0.0, f"orders {sorted(got.values())}"


def check_group_structure(ctx: RunContext):
    """Elements are orthogonal with determinant +-1; determinant counts
    split evenly; the rotation subgroup is the circle-half-turn group."""
    ng = ctx.named
    worst = 0.0
    for m in ng.full.mats:
        worst = max(worst, float(np.max(np.abs(m @ m.T - np.eye(4)))))
    dets = ng.full.dets()
    worst = max(worst, float(np.max(np.abs(np.abs(dets) - 1.0))))
    n_plus = int(np.count_nonzero(dets > 0))
    if n_plus != ng.full.order // 2:
        raise CheckFailed(float(n_plus), "rotations are not half the group")
    rot_idx = {i for i, d in enumerate(dets) if d > 0}
    gc_idx = set(ng.circle_half_turns.subset_indices_in(ng.full))
    if rot_idx != gc_idx:
        raise CheckFailed(float("nan"),
                          "rotation subgroup differs from circle half-turns")
    if worst > 1e-10:
        raise CheckFailed(worst, "orthogonality deviation above 1e-10")
    return worst, None


def check_group_actions(ctx: RunContext):
    """Simple transitivity of the sphere group on half cells and of the quad
    group on even cells; the full group is transitive on even cells with
    stabilizers of order 4 and on half cells with stabilizers of order 2."""
    ng = ctx.named
    lat = ctx.lattice
    a1 = act(ng.sphere_reflections, lat, "half")
    a2 = act(ng.quad_half_turns, lat, "even")
    a3 = act(ng.full, lat, "even")
    a4 = act(ng.full, lat, "half")
    problems = []
    if not a1.simply_transitive:
        problems.append("sphere group not simply transitive on half cells")
    if not a2.simply_transitive:
        problems.append("quad group not simply transitive on even cells")
    stabs3 = set(a3.stabilizer_orders.tolist())
    stabs4 = set(a4.stabilizer_orders.tolist())
    if not (a3.transitive and stabs3 == {4}):
        problems.append(f"full-on-even stabilizers {sorted(stabs3)} != [4]")
    if not (a4.transitive and stabs4 == {2}):
        problems.append(f"full-on-half stabilizers {sorted(stabs4)} != [2]")
    if problems:
        raise CheckFailed(float("nan"), "; ".join(problems))
    return 0.0, None


def check_parameter_exchange(ctx: RunContext):
    """For m = k the coordinate-pair swap extends the symmetry group by a
    factor of two."""
    if ctx.config.m != ctx.config.k:
        raise SkipCheck("parameter exchange needs m = k")
    ng = ctx.named
    ext = exchange_extension(ctx.lattice, ng.full)
    if ext.order != 2 * ng.full.order:
        raise CheckFailed(float(ext.order),
                          f"extension order {ext.order} != {2 * ng.full.order}")
    if not ng.full.is_subgroup_of(ext):
        raise CheckFailed(float("nan"), "original group lost in the extension")
    return 0.0, f"extended order {ext.order}"


# -- orbit checks ---------------------------------------------------------------


def check_orbit_structure(ctx: RunContext):
    """Rotation flow along the cell axis: far rotations separate the cell,
    each interior orbit crosses in one arc through one quarter pair,
    transversally, and quad orbits touch exactly once."""
    sv = ctx.orbit_survey
    if not (sv.separation_ok and sv.quarters_ok and sv.single_arc_ok
            and sv.crossing_counts_ok and sv.transversal_ok
            and sv.quad_contact_ok):
        raise CheckFailed(float("nan"), f"failures: {sv.failures[:4]}")
    if sv.orbit_count != ORBIT_SAMPLES:
        raise CheckFailed(float(sv.orbit_count),
                          f"only {sv.orbit_count} usable orbits")
    return float(sv.min_crossing_rate), f"{sv.orbit_count} orbits"


def check_orbit_winding(ctx: RunContext):
    """The projected boundary quad winds exactly once around the projected
    axis pole."""
    sv = ctx.orbit_survey
    if abs(sv.winding) != 1 or not sv.pole_inside:
        raise CheckFailed(float(sv.winding),
                          f"winding {sv.winding}, pole_inside {sv.pole_inside}")
    return 0.0, f"winding {sv.winding}"


# -- disc checks ----------------------------------------------------------------


RESIDUAL_CEILING = {2: 2.5e-2, 3: 8e-3, 4: 2.5e-3}


def check_disc_convergence(ctx: RunContext):
    """Cascade converged at every level; top-level curvature residual under
    the level's ceiling; area decreased from the initial mesh."""
    rep = ctx.disc_report
    ceiling = RESIDUAL_CEILING.get(ctx.config.level, 1e-3)
    problems = []
    for lv, (_, r) in ctx.disc_out.items():
        if not r.converged:
            problems.append(f"level {lv} not converged")
    if rep.max_residual >= ceiling:
        problems.append(f"residual {rep.max_residual:.3e} >= {ceiling:g}")
    init = plateau.initial_disc(ctx.lattice, ctx.config.level)
    a0 = plateau.total_area(init.verts, init.tris)
    if not rep.area_chordal < a0:
        problems.append("area did not decrease from the initial mesh")
    if problems:
        raise CheckFailed(rep.max_residual, "; ".join(problems))
    return rep.max_residual, f"{rep.iterations} iterations"


def check_disc_refinement(ctx: RunContext):
    """Across cascade levels the minimized area decreases monotonically and
    the curvature residual shrinks by at least a factor of two per level."""
    levels = sorted(ctx.disc_out)
    if len(levels) < 2:
        raise SkipCheck("needs at least two cascade levels")
    areas = [ctx.disc_out[lv][1].area_spherical for lv in levels]
    residuals = [ctx.disc_out[lv][1].max_residual for lv in levels]
    problems = []
    for a, b in zip(areas, areas[1:]):
        if not b < a:
            problems.append(f"area not decreasing: {a:.9f} -> {b:.9f}")
    shrink = min(a / b for a, b in zip(residuals, residuals[1:]))
    if shrink < 2.0:
        problems.append(f"worst residual shrink {shrink:.2f} < 2")
    if problems:
        raise CheckFailed(shrink, "; ".join(problems))
    return shrink, f"areas {[f'{a:.6f}' for a in areas]}"


def check_disc_boundary_symmetry(ctx: RunContext):
    """Boundary vertices pinned to the quad, symmetry deviation within
    tolerance, every vertex inside the cell."""
    rep = ctx.disc_report
    problems = []
    if rep.boundary_deviation > 1e-10:
        problems.append(f"boundary deviation {rep.boundary_deviation:.2e}")
    if rep.symmetry_deviation > ctx.config.tol_sym:
        problems.append(f"symmetry deviation {rep.symmetry_deviation:.2e}")
    if rep.min_containment_margin < -1e-6:
        problems.append(f"containment margin {rep.min_containment_margin:.2e}")
    if problems:
        raise CheckFailed(max(rep.boundary_deviation, rep.symmetry_deviation),
                          "; ".join(problems))
    return max(rep.boundary_deviation, rep.symmetry_deviation), None


def check_disc_curves(ctx: RunContext):
    """The two bisecting-sphere sections are single polylines through a
    common interior point on the cell axis, ending on the quad corners."""
    mesh = ctx.disc_mesh
    curves = plateau.extract_curves(mesh, ctx.lattice)
    worst = max(curves.x_arc_deviation, curves.endpoint_deviation)
    if worst > 1e-6:
        raise CheckFailed(worst, "section endpoints or center off target")
    return worst, (f"alpha {len(curves.alpha)} nodes, "
                   f"beta {len(curves.beta)} nodes")


def check_disc_subdiscs(ctx: RunContext):
    """Cutting the disc along both sections yields four simply connected
    pieces with the expected boundary structure."""
    pieces = plateau.subdiscs(ctx.disc_mesh, ctx.lattice)
    problems = []
    worst = 0.0
    for key, piece in pieces.items():
        if not piece.is_disc:
            problems.append(f"piece {key}: chi={piece.euler_characteristic} "
                            f"loops={piece.boundary_loops}")
        worst = max(worst, piece.boundary_structure_deviation)
    if worst > 1e-8:
        problems.append(f"boundary structure deviation {worst:.2e}")
    if problems:
        raise CheckFailed(worst, "; ".join(problems))
    return worst, "4 pieces, all discs"


def check_disc_graphicality(ctx: RunContext):
    """The disc projects injectively along the axis flow: consistent
    orientation, no overlaps, clear tangency margin, boundary image on the
    projected quad, winding one, and every sampled orbit hits once."""
    rep = plateau.verify_graphical(
        ctx.disc_mesh, ctx.lattice, n_orbits=GRAPHICALITY_ORBITS,
        rng=ctx.rng_for("disc-graphicality"))
    if not rep.ok:
        raise CheckFailed(rep.min_tangency_angle,
                          f"graphicality flags: consistent={rep.orientation_consistent} "
                          f"overlap_free={rep.overlap_free} "
                          f"tangency_ok={rep.tangency_ok} "
                          f"winding={rep.winding} "
                          f"hits=[{rep.orbit_hits_min},{rep.orbit_hits_max}]")
    return rep.min_tangency_angle, (
        f"{rep.orbit_samples} orbits hit once; "
        f"min tangency angle {rep.min_tangency_angle:.3f}")


# -- surface checks --------------------------------------------------------------


def check_weld_structure(ctx: RunContext):
    """Weld cluster histogram matches the incidence of the assembly: disc
    interiors stay single, arc boundaries pair up, and the two corner types
    collect 2k and 2m copies."""
    surf_ = ctx.surf
    mesh = ctx.disc_mesh
    m, k = ctx.config.m, ctx.config.k
    n_copies = 2 * k * m
    n_b = int(np.count_nonzero(mesh.boundary_mask))
    n_v = len(mesh.verts)
    want: dict = {}

    def add(size, count):
        want[size] = want.get(size, 0) + count

    add(1, (n_v - n_b) * n_copies)
    add(2, (n_b - 4) * n_copies // 2)
    add(2 * k, 2 * m)
    add(2 * m, 2 * k)
    if surf_.cluster_sizes != want:
        raise CheckFailed(float("nan"),
                          f"clusters {surf_.cluster_sizes} != {want}")
    return 0.0, f"{surf_.n_verts} vertices after weld"


def check_surface_topology(ctx: RunContext):
    """Closed connected orientable surface of genus (k-1)(m-1)."""
    top = ctx.surf_topology
    m, k = ctx.config.m, ctx.config.k
    want_genus = (k - 1) * (m - 1)
    problems = []
    if not (top.closed and top.connected and top.orientable):
        problems.append(f"closed={top.closed} connected={top.connected} "
                        f"orientable={top.orientable}")
    if top.genus != want_genus:
        problems.append(f"genus {top.genus} != {want_genus}")
    if top.euler_characteristic != 2 - 2 * want_genus:
        problems.append(f"chi {top.euler_characteristic} != {2 - 2 * want_genus}")
    if problems:
        raise CheckFailed(float(top.genus), "; ".join(problems))
    return 0.0, f"chi {top.euler_characteristic}, genus {top.genus}"


def check_axis_points(ctx: RunContext):
    """The surface meets the two distinguished circles exactly in the
    half-integer lattice points."""
    surf_ = ctx.surf
    lat = ctx.lattice
    v = surf_.verts
    on_low = np.flatnonzero(np.hypot(v[:, 2], v[:, 3]) < 1e-7)
    on_up = np.flatnonzero(np.hypot(v[:, 0], v[:, 1]) < 1e-7)
    m, k = lat.m, lat.k
    if len(on_low) != 2 * m or len(on_up) != 2 * k:
        raise CheckFailed(float(len(on_low) + len(on_up)),
                          f"{len(on_low)} points on the lower circle "
                          f"(want {2 * m}), {len(on_up)} on the upper "
                          f"(want {2 * k})")
    worst = 0.0
    for vid in on_low:
        d = min(float(np.linalg.norm(v[vid] - lat.t_lower(HALF + n)))
                for n in range(2 * m))
        worst = max(worst, d)
    for vid in on_up:
        d = min(float(np.linalg.norm(v[vid] - lat.t_upper(HALF + n)))
                for n in range(2 * k))
        worst = max(worst, d)
    if worst > 1e-7:
        raise CheckFailed(worst, "circle point off the half-integer grid")
    return worst, f"{len(on_low)} + {len(on_up)} circle points"


def check_cell_ledger(ctx: RunContext):
    """Every half-integer cell holds one disc piece with four orthodox edge
    crossings; measured corner angles satisfy the angle-sum identity within
    tolerance, and the analytic angles satisfy it exactly."""
    led = ctx.surf_ledger
    lat = ctx.lattice
    target = (3.0 - 1.0 / lat.k - 1.0 / lat.m) * math.pi
    problems = []
    if not led.counts_ok:
        problems.append("crossing counts or piece topology wrong")
    if not led.all_quadrilateral:
        problems.append("a piece is not the quadrilateral case")
    if led.max_residual > 5e-2 * math.pi:
        problems.append(f"angle-sum residual {led.max_residual:.3e}")
    worst_analytic = max(abs(c.angle_sum_analytic - target) for c in led.cells)
    if worst_analytic > 1e-3:
        problems.append(f"analytic angle sum off by {worst_analytic:.2e}")
    if problems:
        raise CheckFailed(led.max_residual, "; ".join(problems))
    return led.max_residual, (
        f"{len(led.cells)} cells, worst measured residual "
        f"{led.max_residual:.2e}, analytic {worst_analytic:.2e}")


def check_umbilics(ctx: RunContext):
    """Curvature isotropy is extremal exactly at the predicted umbilic
    points, ranked against random surface vertices."""
    rep = surface.umbilic_probe(
        ctx.surf, ctx.lattice, n_samples=UMBILIC_SAMPLES,
        rng=ctx.rng_for("umbilic-candidates"))
    m, k = ctx.config.m, ctx.config.k
    want = 2 * k + 2 * m if k > 2 else 4
    problems = []
    if rep.expected_count != want:
        problems.append(f"candidate count {rep.expected_count} != {want}")
    if not rep.all_below:
        worst = max(c.percentile for c in rep.candidates)
        problems.append(f"a candidate sits at percentile {worst:.1f}")
    if rep.warnings:
        problems.append("; ".join(rep.warnings))
    if problems:
        raise CheckFailed(max(c.percentile for c in rep.candidates),
                          "; ".join(problems))
    return max(c.percentile for c in rep.candidates), (
        f"{rep.expected_count} candidates, total degree {rep.total_degree}")


def check_symmetry_flags(ctx: RunContext):
    """The full symmetry group preserves the mesh; sides-preserving elements
    are exactly the sphere reflections, orientation-preserving exactly the
    designated index-two subgroup, rotations exactly the circle half-turns."""
    ng = ctx.named
    sym = ctx.surf_symmetry
    problems = []
    if sym.max_deviation > 10 * ctx.surf.weld_tol:
        problems.append(f"deviation {sym.max_deviation:.2e}")
    pairs = (
        ("sides", set(sym.sides_indices), ng.sphere_reflections),
        ("orientation", set(sym.orientation_indices), ng.orientation_preserving),
        ("rotation", set(sym.rotation_indices), ng.circle_half_turns),
    )
    for name, got, grp in pairs:
        want = set(grp.subset_indices_in(ng.full))
        if got != want:
            problems.append(f"{name} flags differ from the named subgroup")
    if problems:
        raise CheckFailed(sym.max_deviation, "; ".join(problems))
    return sym.max_deviation, f"deviation {sym.max_deviation:.2e}"


def check_boundary_circles(ctx: RunContext):
    """The km quad circles lie on the assembled surface within mesh
    resolution."""
    surf_ = ctx.surf
    lat = ctx.lattice
    tree = cKDTree(surf_.verts)
    h = max(float(np.linalg.norm(
        surf_.verts[surf_.tris[:, a]] - surf_.verts[surf_.tris[:, b]],
        axis=1).max()) for a, b in ((0, 1), (1, 2), (2, 0)))
    worst = 0.0
    thetas = np.linspace(0, 2 * math.pi, 256, endpoint=False)
    for _, circ in lat.circles_quad():
        pts = (np.outer(np.cos(thetas), circ.e1)
               + np.outer(np.sin(thetas), circ.e2))
        d, _ = tree.query(pts)
        worst = max(worst, float(d.max()))
    if worst > 0.75 * h:
        raise CheckFailed(worst, f"quad circle {worst:.3e} from the mesh "
                                 f"(edge length {h:.3e})")
    return worst, f"worst gap {worst:.2e} at edge length {h:.2e}"


def check_checkpoint_roundtrip(ctx: RunContext):
    """Disc checkpoints round-trip exactly through the OBJ + sidecar pair,
    and the stereographic export preserves exact vertices in its sidecar."""
    import json
    import os
    mesh = ctx.disc_mesh
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "disc.obj")
        objio.write_obj_4d(path, mesh.verts, mesh.tris, mesh.boundary_mask)
        v, t = objio.read_obj_4d(path)
        exact = bool(np.all(v == mesh.verts)) and bool(np.all(t == mesh.tris))
        spath = os.path.join(tmp, "surf.obj")
        objio.write_obj_stereo(spath, ctx.surf.verts, ctx.surf.tris,
                               objio.default_pole(ctx.lattice))
        side = json.load(open(spath + ".json"))
        exact &= bool(np.all(np.asarray(side["vertices"]) == ctx.surf.verts))
    if not exact:
        raise CheckFailed(1.0, "round trip lost precision")
    return 0.0, None


REGISTRY = [
    ("circle-frames", "geometry", check_circle_frames),
    ("killing-orbit-projection", "geometry", check_orbit_projection),
    ("geodesic-arcs", "geometry", check_geodesics),
    ("circle-sphere-relations", "geometry", check_circle_sphere_relations),
    ("cell-metrics", "lattice", check_cell_metrics),
    ("coverage-multiplicity", "lattice", check_coverage),
    ("boundary-quads", "lattice", check_boundary_quads),
    ("group-orders", "group", check_group_orders),
    ("group-structure", "group", check_group_structure),
    ("group-actions", "group", check_group_actions),
    ("parameter-exchange", "group", check_parameter_exchange),
    ("axis-orbit-structure", "orbit", check_orbit_structure),
    ("axis-orbit-winding", "orbit", check_orbit_winding),
    ("disc-convergence", "disc", check_disc_convergence),
    ("disc-area-refinement", "disc", check_disc_refinement),
    ("disc-boundary-symmetry", "disc", check_disc_boundary_symmetry),
    ("disc-section-curves", "disc", check_disc_curves),
    ("disc-subdiscs", "disc", check_disc_subdiscs),
    ("disc-graphicality", "disc", check_disc_graphicality),
    ("weld-structure", "surface", check_weld_structure),
    ("closed-topology", "surface", check_surface_topology),
    ("axis-points-on-surface", "surface", check_axis_points),
    ("cell-ledger", "surface", check_cell_ledger),
    ("umbilic-candidates", "surface", check_umbilics),
    ("symmetry-flags", "surface", check_symmetry_flags),
    ("boundary-circles-on-surface", "surface", check_boundary_circles),
    ("checkpoint-roundtrip", "surface", check_checkpoint_roundtrip),
]

GROUPS = ["geometry", "lattice", "group", "orbit", "disc", "surface"]


def run_suite(config: RunConfig, only: str = "all") -> SuiteReport:
    """Run the verification checks for one configuration.

    `only` filters by group name or exact check name; "all" runs everything.
    Failures never propagate as exceptions: every outcome is recorded as a
    result row.
    """
    ctx = RunContext(config)
    report = SuiteReport(config=ctx.config)
    known = {only} if only != "all" else None
    if known is not None and only not in GROUPS and \
            only not in {name for name, _, _ in REGISTRY}:
        raise ConfigError(f"unknown suite or check name {only!r}")
    for name, group, fn in REGISTRY:
        if known is not None and name not in known and group not in known:
            continue
        try:
            residual, witness = fn(ctx)
            report.results.append(CheckResult(
                name=name, group=group, status="pass",
                residual=float(residual), witness=witness))
        except SkipCheck as sk:
            report.results.append(CheckResult(
                name=name, group=group, status="skip", reason=sk.reason))
        except CheckFailed as cf:
            report.results.append(CheckResult(
                name=name, group=group, status="fail",
                residual=_clean(cf.residual), witness=cf.witness))
        except UnsupportedParametersError as ue:
            report.results.append(CheckResult(
                name=name, group=group, status="fail", witness=str(ue)))
        except Exception as exc:   # upstream breakage recorded, not raised
            report.results.append(CheckResult(
                name=name, group=group, status="fail",
                witness=f"{type(exc).__name__}: {exc}"))
    return report


def _clean(x: float):
    return None if x != x else float(x)
