"""Discrete Plateau solver: area-minimizing triangulated discs spanning a
cell's boundary quadrilateral.

The disc starts as the two lower-boundary triangles of the cell, geodesically
midpoint-subdivided, and is driven to a constrained minimum of triangle area
by projected gradient descent on the sphere with backtracking line search.
Boundary vertices never move; the interior is re-symmetrized under the cell's
Klein four-group every iteration, so the converged disc inherits the cell
symmetries to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import s3
from .lattice import Lattice, CellIndex, HALF

DEG_AREA_EPS = 1e-300


class LineSearchError(RuntimeError):
    """Area could not be decreased along the search direction."""


class SymmetryMatchError(RuntimeError):
    """A symmetry element does not permute the mesh vertices."""


class CurveTopologyError(RuntimeError):
    """A bisecting-sphere section of the mesh is not a single polyline."""


class GraphicalityError(RuntimeError):
    """Two projected triangles overlap; carries a witness pair."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass
class TriMeshS3:
    """Triangle mesh with vertices on S^3."""

    verts: np.ndarray             # (n, 4) float
    tris: np.ndarray              # (t, 3) int
    boundary_mask: np.ndarray     # (n,) bool
    level: int = 0
    orbit_tags: np.ndarray | None = None   # canonical vertex id per symmetry orbit

    def copy(self) -> "TriMeshS3":
        tags = None if self.orbit_tags is None else self.orbit_tags.copy()
        return TriMeshS3(self.verts.copy(), self.tris.copy(),
                         self.boundary_mask.copy(), self.level, tags)

    @property
    def n_verts(self) -> int:
        return len(self.verts)

    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted pairs."""
        e = np.vstack([self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def edge_counts(self):
        e = np.vstack([self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq, counts

    def boundary_edges(self) -> np.ndarray:
        uniq, counts = self.edge_counts()
        return uniq[counts == 1]

    def boundary_loop(self) -> np.ndarray:
        """Boundary vertex indices in cyclic order."""
        be = self.boundary_edges()
        adj: dict = {}
        for a, b in be:
            adj.setdefault(int(a), []).append(int(b))
            adj.setdefault(int(b), []).append(int(a))
        start = int(be[0, 0])
        loop = [start]
        prev, cur = None, start
        while True:
            nxts = [v for v in adj[cur] if v != prev]
            if not nxts:
                break
            prev, cur = cur, nxts[0]
            if cur == start:
                break
            loop.append(cur)
        return np.array(loop, dtype=int)

    def mean_edge_length(self) -> float:
        e = self.edges()
        d = self.verts[e[:, 0]] - self.verts[e[:, 1]]
        return float(np.mean(np.linalg.norm(d, axis=1)))


def initial_disc(lat: Lattice, level: int, idx: CellIndex | None = None) -> TriMeshS3:
    """Geodesic midpoint subdivision (to the given level) of the two
    lower-boundary triangles of a cell. Boundary vertices land equally
    spaced by arc length on the boundary quad."""
    if idx is None:
        idx = lat.cell("int", 0, 0)
    if level < 0 or int(level) != level:
        raise ValueError("level must be a nonnegative integer")
    parts = lat.boundary_parts(idx)
    tA, tB = parts.minus_triangles
    # shared edge is (tA[0], tA[1]) == (tB[0], tB[1]); orient consistently
    verts = np.stack([tA[0], tA[1], tA[2], tB[2]])
    tris = np.array([[0, 1, 2], [1, 0, 3]], dtype=int)
    mesh = TriMeshS3(verts=verts, tris=tris,
                     boundary_mask=np.ones(4, dtype=bool), level=0)
    for _ in range(int(level)):
        mesh = subdivide(mesh)
    return mesh


def subdivide(mesh: TriMeshS3) -> TriMeshS3:
    """One round of geodesic-midpoint 1:4 subdivision."""
    uniq, counts = mesh.edge_counts()
    mid_index = {}
    new_verts = [mesh.verts]
    next_id = mesh.n_verts
    mids = s3_midpoints(mesh.verts[uniq[:, 0]], mesh.verts[uniq[:, 1]])
    for row, (a, b) in enumerate(uniq):
        mid_index[(int(a), int(b))] = next_id
        next_id += 1
    new_verts.append(mids)
    verts = np.vstack(new_verts)

    def mid(a, b):
        return mid_index[(min(a, b), max(a, b))]

    tris = []
    for t in mesh.tris:
        a, b, c = (int(v) for v in t)
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
    tris = np.array(tris, dtype=int)

    boundary = np.zeros(len(verts), dtype=bool)
    boundary[: mesh.n_verts] = mesh.boundary_mask
    onboundary = dict((tuple(e), cnt == 1) for e, cnt in zip(map(tuple, uniq), counts))
    for (a, b), vid in mid_index.items():
        boundary[vid] = onboundary[(a, b)]
    return TriMeshS3(verts=verts, tris=tris, boundary_mask=boundary,
                     level=mesh.level + 1)


def s3_midpoints(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    s = p + q
    return s / np.linalg.norm(s, axis=-1, keepdims=True)


# -- areas and gradients ------------------------------------------------------


def tri_areas(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Flat (chordal) triangle areas in R^4."""
    a = verts[tris[:, 1]] - verts[tris[:, 0]]
    b = verts[tris[:, 2]] - verts[tris[:, 0]]
    g11 = np.einsum("ij,ij->i", a, a)
    g22 = np.einsum("ij,ij->i", b, b)
    g12 = np.einsum("ij,ij->i", a, b)
    return 0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))


def total_area(verts: np.ndarray, tris: np.ndarray) -> float:
    return float(np.sum(tri_areas(verts, tris)))


def area_gradient(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Gradient of total chordal area with respect to vertex positions."""
    v0, v1, v2 = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
    a = v1 - v0
    b = v2 - v0
    g11 = np.einsum("ij,ij->i", a, a)
    g22 = np.einsum("ij,ij->i", b, b)
    g12 = np.einsum("ij,ij->i", a, b)
    area4 = 2.0 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0)) + DEG_AREA_EPS
    ga = (g22[:, None] * a - g12[:, None] * b) / area4[:, None]
    gb = (g11[:, None] * b - g12[:, None] * a) / area4[:, None]
    out = np.zeros_like(verts)
    idx = tris.reshape(-1)
    contrib = np.concatenate([-(ga + gb), ga, gb])
    cidx = np.concatenate([tris[:, 0], tris[:, 1], tris[:, 2]])
    for col in range(4):
        out[:, col] = np.bincount(cidx, weights=contrib[:, col], minlength=len(verts))
    return out


def spherical_tri_areas(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Intrinsic (geodesic) triangle areas via spherical excess."""
    p0, p1, p2 = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]

    def gdist(x, y):
        return np.arccos(np.clip(np.einsum("ij,ij->i", x, y), -1.0, 1.0))

    a = gdist(p1, p2)
    b = gdist(p0, p2)
    c = gdist(p0, p1)
    s = 0.5 * (a + b + c)
    inner = (np.tan(0.5 * s) * np.tan(0.5 * (s - a))
             * np.tan(0.5 * (s - b)) * np.tan(0.5 * (s - c)))
    return 4.0 * np.arctan(np.sqrt(np.maximum(inner, 0.0)))


def total_spherical_area(verts: np.ndarray, tris: np.ndarray) -> float:
    return float(np.sum(spherical_tri_areas(verts, tris)))


# -- symmetry -----------------------------------------------------------------


def vertex_orbit_perms(mesh: TriMeshS3, mats, tol: float = 1e-8) -> np.ndarray:
    """perms[g, i] = j with mats[g] @ verts[i] == verts[j]."""
    from scipy.spatial import cKDTree

    tree = cKDTree(mesh.verts)
    perms = np.empty((len(mats), mesh.n_verts), dtype=np.int64)
    for gi, g in enumerate(mats):
        moved = mesh.verts @ np.asarray(g).T
        d, j = tree.query(moved)
        if np.max(d) > tol or len(set(j.tolist())) != mesh.n_verts:
            raise SymmetryMatchError(
                f"symmetry element {gi} does not permute mesh vertices "
                f"(max match distance {np.max(d):.3e})")
        perms[gi] = j
    return perms


def symmetrize(verts: np.ndarray, mats: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Average each vertex with the pulled-back positions of its orbit and
    renormalize. Exact fixed point when the configuration is symmetric."""
    acc = np.zeros_like(verts)
    for g, perm in zip(mats, perms):
        acc += verts[perm] @ np.asarray(g)  # g^T x_{perm(i)}, orthogonal g
    acc /= len(mats)
    return acc / np.linalg.norm(acc, axis=1, keepdims=True)


def symmetry_deviation(verts: np.ndarray, mats: np.ndarray, perms: np.ndarray) -> float:
    dev = 0.0
    for g, perm in zip(mats, perms):
        moved = verts @ np.asarray(g).T
        dev = max(dev, float(np.max(np.abs(moved - verts[perm]))))
    return dev


# -- mean curvature residual --------------------------------------------------


def vertex_normals(mesh: TriMeshS3) -> np.ndarray:
    return normals_of(mesh.verts, mesh.tris)


def normals_of(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Unit surface normals in T(S^3): area-weighted triangle normals
    projected orthogonal to the vertex position."""
    n_tri = s3.cross4_many(v[t[:, 0]], v[t[:, 1]], v[t[:, 2]])
    w = tri_areas(v, t)
    acc = np.zeros_like(v)
    for corner in range(3):
        for col in range(4):
            acc[:, col] += np.bincount(t[:, corner], weights=w * n_tri[:, col],
                                       minlength=len(v))
    acc -= np.einsum("ij,ij->i", acc, v)[:, None] * v
    norms = np.linalg.norm(acc, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return acc / norms


def quadric_normals(mesh: TriMeshS3) -> np.ndarray:
    """Vertex normals from a local quadric fit over the two-ring.

    The area-weighted triangle-normal average is only first-order accurate
    where the stencil is one-sided (near the boundary); fitting a quadratic
    height field and reading its tangent-plane tilt restores second order.
    """
    v = mesh.verts
    nu0 = normals_of(v, mesh.tris)
    nbr_dst, nbr_off = vertex_neighbors(mesh)

    def ring(i):
        return nbr_dst[nbr_off[i]: nbr_off[i + 1]]

    out = nu0.copy()
    for i in range(mesh.n_verts):
        two_ring = set()
        for j in ring(i):
            two_ring.add(int(j))
            two_ring.update(int(q) for q in ring(int(j)))
        two_ring.discard(i)
        pts = v[sorted(two_ring)]
        # tangent frame of T_i(S^3) complementary to the normal estimate
        t1 = pts[0] - v[i]
        t1 -= (t1 @ v[i]) * v[i]
        t1 -= (t1 @ nu0[i]) * nu0[i]
        n1 = np.linalg.norm(t1)
        if n1 < 1e-12:
            continue
        t1 /= n1
        t2 = s3.cross4(v[i], nu0[i], t1)
        d = pts - v[i]
        u = d @ t1
        w = d @ t2
        h = d @ nu0[i]
        cols = np.column_stack([u, w, u * u, u * w, w * w,
                                np.ones_like(u)])
        try:
            coef, *_ = np.linalg.lstsq(cols, h, rcond=None)
        except np.linalg.LinAlgError:
            continue
        nu = nu0[i] - coef[0] * t1 - coef[1] * t2
        nu -= (nu @ v[i]) * v[i]
        norm = np.linalg.norm(nu)
        if norm > 1e-12:
            out[i] = nu / norm
    return out


def mean_curvature_residual(mesh: TriMeshS3) -> np.ndarray:
    """Per-vertex minimality defect: the intrinsic cotangent-Laplacian
    displacement dotted with the surface normal, scaled by local mean
    geodesic edge length squared. Zero for an exactly minimal surface in
    S^3; boundary vertices get zero (the boundary is constrained).
    """
    v = mesh.verts
    t = mesh.tris
    p = [v[t[:, i]] for i in range(3)]

    def gdist(x, y):
        return np.arccos(np.clip(np.einsum("ij,ij->i", x, y), -1.0, 1.0))

    # geodesic side lengths opposite each corner
    L = [gdist(p[1], p[2]), gdist(p[0], p[2]), gdist(p[0], p[1])]
    lap = np.zeros_like(v)
    wsum = np.zeros(len(v))
    lsum = np.zeros(len(v))
    lcnt = np.zeros(len(v))
    for corner in range(3):
        a = L[corner]
        b = L[(corner + 1) % 3]
        c = L[(corner + 2) % 3]
        cosang = (np.cos(a) - np.cos(b) * np.cos(c)) / np.maximum(np.sin(b) * np.sin(c), 1e-300)
        cosang = np.clip(cosang, -1.0, 1.0)
        # clamp keeps a degenerate corner visible as a large finite residual
        cot = cosang / np.sqrt(np.maximum(1.0 - cosang ** 2, 1e-16))
        i = t[:, (corner + 1) % 3]
        j = t[:, (corner + 2) % 3]
        # edge (i, j) gets cot(angle at `corner`) / 2 from this triangle
        for (src, dst) in ((i, j), (j, i)):
            diff = v[src] - v[dst]
            for col in range(4):
                lap[:, col] += np.bincount(dst, weights=0.5 * cot * diff[:, col],
                                           minlength=len(v))
            wsum += np.bincount(dst, weights=0.5 * cot, minlength=len(v))
        for (src, dst) in ((i, j), (j, i)):
            lsum += np.bincount(dst, weights=a, minlength=len(v))
            lcnt += np.bincount(dst, weights=np.ones(len(a)), minlength=len(v))
    nu = quadric_normals(mesh)
    h = lsum / np.maximum(lcnt, 1.0)
    res = np.abs(np.einsum("ij,ij->i", lap, nu)) / np.maximum(h * h, 1e-300)
    res[mesh.boundary_mask] = 0.0
    return res


# -- solver -------------------------------------------------------------------


def vertex_neighbors(mesh: TriMeshS3):
    """CSR-style neighbor lists from the edge graph."""
    e = mesh.edges()
    both = np.vstack([e, e[:, ::-1]])
    order = np.argsort(both[:, 0], kind="stable")
    src = both[order, 0]
    dst = both[order, 1]
    counts = np.bincount(src, minlength=mesh.n_verts)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return dst, offsets


def tangential_smooth(verts: np.ndarray, nbr_dst: np.ndarray,
                      nbr_off: np.ndarray, normals: np.ndarray,
                      free: np.ndarray, weight: float,
                      density: np.ndarray | None = None) -> np.ndarray:
    """Move free vertices toward their (optionally density-weighted)
    neighbor centroid, but only within the surface tangent plane
    (orthogonal to both the position and the surface normal), so the shape
    is preserved while the parameterization stays non-degenerate. A
    density > 1 attracts vertices, grading the mesh finer there."""
    n = len(verts)
    counts = np.diff(nbr_off)
    src = np.repeat(np.arange(n), counts)
    w = np.ones(len(nbr_dst)) if density is None else density[nbr_dst]
    cent = np.zeros_like(verts)
    for col in range(4):
        cent[:, col] = np.bincount(src, weights=w * verts[nbr_dst, col],
                                   minlength=n)
    wsum = np.bincount(src, weights=w, minlength=n)
    cent /= np.maximum(wsum, 1e-300)[:, None]
    d = cent - verts
    d -= np.einsum("ij,ij->i", d, verts)[:, None] * verts
    d -= np.einsum("ij,ij->i", d, normals)[:, None] * normals
    out = verts + weight * d * free[:, None]
    return out / np.linalg.norm(out, axis=1, keepdims=True)


@dataclass
class SolverOptions:
    level: int = 5
    max_iter: int = 50000
    grad_tol: float = 1e-10          # stop when max vertex displacement drops below
    sym_tol: float = 1e-10           # reported symmetry deviation must stay below
    step_factor: float = 0.1         # initial step = step_factor * mean edge length
    step_rule: str = "momentum"      # "plain" | "momentum"
    momentum: float = 0.93
    smooth_weight: float = 0.35      # tangential vertex-averaging strength
    smooth_every: int = 1            # maintenance remesh period (0 disables)
    smooth_passes: int = 1
    grade_strength: float = 0.5      # extra vertex density at the quad corners
    grade_scale: float = 0.25        # geodesic falloff of the corner grading
    containment_tol: float = 1e-6
    max_halvings: int = 40


@dataclass
class DiscReport:
    level: int
    iterations: int
    converged: bool
    area_chordal: float
    area_spherical: float
    max_residual: float
    boundary_deviation: float
    symmetry_deviation: float
    last_displacement: float
    min_triangle_area: float
    min_containment_margin: float
    line_search_resets: int
    remesh_events: int = 0
    max_remesh_area_increase: float = 0.0
    axis_point: np.ndarray | None = None
    curves: "CurveSet | None" = None
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["warnings"] = list(self.warnings)
        d["axis_point"] = None if self.axis_point is None else self.axis_point.tolist()
        d["curves"] = None if self.curves is None else self.curves.to_json_dict()
        return d


def boundary_deviation(mesh: TriMeshS3, lat: Lattice, idx: CellIndex) -> float:
    quad = lat.boundary_parts(idx).quad
    dev = 0.0
    for vid in np.flatnonzero(mesh.boundary_mask):
        p = mesh.verts[vid]
        d = min(s3.arc_distance(*quad.arc_endpoints(a), p) for a in range(4))
        dev = max(dev, d)
    return dev


# -- bisecting-sphere sections --------------------------------------------------


def plane_section(mesh: TriMeshS3, normal: np.ndarray,
                  snap_tol: float = 1e-9):
    """Intersection of the mesh with the great sphere {x . normal = 0}.

    Returns (nodes, points): an ordered list of node keys and the matching
    (n, 4) polyline. Nodes are either ("v", i) for a vertex lying on the
    sphere or ("e", (a, b)) for a crossing on edge (a, b); the keys are
    shared between adjacent triangles so the chained segments are
    watertight. Raises CurveTopologyError unless the section is exactly one
    open polyline.
    """
    v = mesh.verts
    s = v @ np.asarray(normal, dtype=float)
    onplane = np.abs(s) < snap_tol

    points: dict = {}
    segments: set = set()

    def vertex_node(i):
        key = ("v", int(i))
        points[key] = v[i]
        return key

    def edge_node(a, b):
        a, b = int(a), int(b)
        if a > b:
            a, b = b, a
        key = ("e", (a, b))
        if key not in points:
            # chord zero of the linear interpolant; normalizing preserves it
            t = s[a] / (s[a] - s[b])
            p = (1.0 - t) * v[a] + t * v[b]
            points[key] = p / np.linalg.norm(p)
        return key

    for tri in mesh.tris:
        a, b, c = (int(q) for q in tri)
        zero = [q for q in (a, b, c) if onplane[q]]
        if len(zero) == 3:
            raise CurveTopologyError("a mesh triangle lies inside the sphere")
        if len(zero) == 2:
            segments.add(frozenset((vertex_node(zero[0]), vertex_node(zero[1]))))
            continue
        if len(zero) == 1:
            others = [q for q in (a, b, c) if q != zero[0]]
            if s[others[0]] * s[others[1]] < 0.0:
                segments.add(frozenset((vertex_node(zero[0]),
                                        edge_node(*others))))
            continue
        signs = [s[a] > 0, s[b] > 0, s[c] > 0]
        if all(signs) or not any(signs):
            continue
        crossings = [edge_node(p, q) for p, q in ((a, b), (b, c), (c, a))
                     if (s[p] > 0) != (s[q] > 0)]
        segments.add(frozenset(crossings))

    if not segments:
        raise CurveTopologyError("the sphere misses the mesh")

    adj: dict = {}
    for seg in segments:
        p, q = tuple(seg)
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    ends = [n for n, nb in adj.items() if len(nb) == 1]
    if len(ends) != 2 or any(len(nb) > 2 for nb in adj.values()):
        raise CurveTopologyError(
            f"section is not a single open polyline "
            f"({len(ends)} endpoints, {len(segments)} segments)")
    chain = [ends[0]]
    prev = None
    while True:
        nxts = [q for q in adj[chain[-1]] if q != prev]
        if not nxts:
            break
        prev = chain[-1]
        chain.append(nxts[0])
    if len(chain) != len(adj):
        raise CurveTopologyError("section polyline is disconnected")
    return chain, np.stack([points[n] for n in chain])


@dataclass
class CurveSet:
    """The two bisecting-sphere sections of a disc and their crossing.

    Each polyline runs from its outer endpoint (a boundary-quad corner) to
    the common axis point x. alpha lives on the lower bisecting sphere and
    ends on the upper lattice points; beta the other way around.
    """

    alpha_minus: np.ndarray
    alpha_plus: np.ndarray
    beta_minus: np.ndarray
    beta_plus: np.ndarray
    x: np.ndarray
    x_arc_deviation: float        # distance from x to the axis arc
    endpoint_deviation: float     # worst endpoint mismatch vs lattice corners

    @property
    def alpha(self) -> np.ndarray:
        """Full lower-sphere section, from t^[j-1/2] to t^[j+1/2]."""
        return np.vstack([self.alpha_minus, self.alpha_plus[::-1][1:]])

    @property
    def beta(self) -> np.ndarray:
        return np.vstack([self.beta_minus, self.beta_plus[::-1][1:]])

    def to_json_dict(self) -> dict:
        return {
            "alpha_minus": self.alpha_minus.tolist(),
            "alpha_plus": self.alpha_plus.tolist(),
            "beta_minus": self.beta_minus.tolist(),
            "beta_plus": self.beta_plus.tolist(),
            "x": self.x.tolist(),
            "x_arc_deviation": self.x_arc_deviation,
            "endpoint_deviation": self.endpoint_deviation,
        }


def extract_curves(mesh: TriMeshS3, lat: Lattice,
                   idx: CellIndex | None = None,
                   snap_tol: float = 1e-9) -> CurveSet:
    """Cut the disc along its two bisecting spheres.

    The sections must each be a single polyline, crossing at one common
    mesh vertex, the axis point x; each half-curve is returned oriented
    from its quad-corner endpoint to x.
    """
    if idx is None:
        idx = lat.cell("int", 0, 0)
    n_low = lat.sigma_lower(idx.i).normal
    n_up = lat.sigma_upper(idx.j).normal
    chain_a, pts_a = plane_section(mesh, n_low, snap_tol)
    chain_b, pts_b = plane_section(mesh, n_up, snap_tol)

    common = set(chain_a) & set(chain_b)
    common = {n for n in common if n[0] == "v"}
    if len(common) != 1:
        raise CurveTopologyError(
            f"sections share {len(common)} mesh vertices, expected exactly 1")
    x_node = common.pop()
    x = mesh.verts[x_node[1]]
    x_dev = s3.arc_distance(lat.t_lower(idx.i), lat.t_upper(idx.j), x)

    ep_dev = 0.0

    def halves(chain, pts, targets):
        """Split at the x node; key each half by its outer endpoint."""
        nonlocal ep_dev
        cut = chain.index(x_node)
        parts = [pts[: cut + 1], pts[cut:][::-1]]
        out = {}
        for part in parts:
            dists = [s3.sphere_distance(part[0], tgt) for tgt in targets]
            label = int(np.argmin(dists))
            if label in out or min(dists) > 1e-6:
                raise CurveTopologyError("section endpoints do not match the "
                                         "boundary-quad corners")
            ep_dev = max(ep_dev, min(dists))
            out[label] = part
        return out

    a_parts = halves(chain_a, pts_a,
                     [lat.t_upper(idx.j - HALF), lat.t_upper(idx.j + HALF)])
    b_parts = halves(chain_b, pts_b,
                     [lat.t_lower(idx.i - HALF), lat.t_lower(idx.i + HALF)])
    return CurveSet(
        alpha_minus=a_parts[0], alpha_plus=a_parts[1],
        beta_minus=b_parts[0], beta_plus=b_parts[1],
        x=x, x_arc_deviation=float(x_dev), endpoint_deviation=float(ep_dev))


def cut_by_plane(verts: np.ndarray, tris: np.ndarray, normal: np.ndarray,
                 snap_tol: float = 1e-9):
    """Split every triangle that strictly straddles {x . normal = 0}.

    Crossing points become shared new vertices (keyed per edge), so the
    result is watertight, and afterwards no triangle has corners on both
    strict sides of the plane.
    """
    s = verts @ np.asarray(normal, dtype=float)
    side = np.where(np.abs(s) < snap_tol, 0, np.sign(s)).astype(int)
    new_verts = [verts]
    next_id = len(verts)
    cross_id: dict = {}

    def crossing(a, b):
        nonlocal next_id
        key = (a, b) if a < b else (b, a)
        if key not in cross_id:
            t = s[key[0]] / (s[key[0]] - s[key[1]])
            p = (1.0 - t) * verts[key[0]] + t * verts[key[1]]
            new_verts.append((p / np.linalg.norm(p))[None, :])
            cross_id[key] = next_id
            next_id += 1
        return cross_id[key]

    tri_sides = side[tris]
    mixed = (tri_sides == 1).any(axis=1) & (tri_sides == -1).any(axis=1)
    out = [list(tri) for tri in tris[~mixed]]
    for tri in tris[mixed]:
        corners = [int(q) for q in tri]
        sides = [side[q] for q in corners]
        pos = sides.count(1)
        if 0 in sides:
            # one corner on the plane, the others straddling
            zi = sides.index(0)
            z, p, q = corners[zi], corners[(zi + 1) % 3], corners[(zi + 2) % 3]
            c = crossing(p, q)
            out.append([z, p, c])
            out.append([z, c, q])
            continue
        # generic straddle: one lone corner against two
        lone_side = 1 if pos == 1 else -1
        li = sides.index(lone_side)
        lone = corners[li]
        p, q = corners[(li + 1) % 3], corners[(li + 2) % 3]
        c1 = crossing(lone, p)
        c2 = crossing(q, lone)
        out.append([lone, c1, c2])
        out.append([c1, p, q])
        out.append([c1, q, c2])
    return np.vstack(new_verts), np.array(out, dtype=int)


@dataclass
class Subdisc:
    """One of the four pieces of the disc cut along both sections."""

    verts: np.ndarray
    tris: np.ndarray
    side: tuple              # (lower sign, upper sign), each +1 or -1
    connected: bool
    euler_characteristic: int
    boundary_loops: int
    boundary_structure_deviation: float

    @property
    def is_disc(self) -> bool:
        return (self.connected and self.euler_characteristic == 1
                and self.boundary_loops == 1)


def submesh_topology(tris: np.ndarray):
    """(connected, chi, boundary loop count) of a triangle subset."""
    used = np.unique(tris)
    remap = {int(v): i for i, v in enumerate(used)}
    t = np.array([[remap[int(q)] for q in tri] for tri in tris], dtype=int)
    e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    chi = len(used) - len(uniq) + len(t)

    parent = list(range(len(used)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in uniq:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb
    connected = len({find(i) for i in range(len(used))}) == 1

    boundary = uniq[counts == 1]
    loops = 0
    if len(boundary):
        adj: dict = {}
        for a, b in boundary:
            adj.setdefault(int(a), []).append(int(b))
            adj.setdefault(int(b), []).append(int(a))
        if all(len(nb) == 2 for nb in adj.values()):
            seen: set = set()
            for start in adj:
                if start in seen:
                    continue
                loops += 1
                prev, cur = None, start
                while cur not in seen:
                    seen.add(cur)
                    nxt = [q for q in adj[cur] if q != prev]
                    prev, cur = cur, nxt[0]
        else:
            loops = -1   # boundary graph is not a union of simple cycles
    return connected, chi, loops


def subdiscs(mesh: TriMeshS3, lat: Lattice,
             idx: CellIndex | None = None,
             snap_tol: float = 1e-9) -> dict:
    """Cut the disc along both bisecting spheres into its four pieces.

    Returns {(sl, su): Subdisc} with sl, su in {-1, +1} naming the side of
    the lower and upper bisecting sphere. Each piece should be a combinatorial
    disc whose boundary runs along the two cut curves and one quad arc.
    """
    if idx is None:
        idx = lat.cell("int", 0, 0)
    n_low = lat.sigma_lower(idx.i).normal
    n_up = lat.sigma_upper(idx.j).normal
    v, t = cut_by_plane(mesh.verts, mesh.tris, n_low, snap_tol)
    v, t = cut_by_plane(v, t, n_up, snap_tol)

    cent = v[t].mean(axis=1)
    sl = np.sign(cent @ n_low)
    su = np.sign(cent @ n_up)
    out = {}
    for a in (-1, 1):
        for b in (-1, 1):
            sel = t[(sl == a) & (su == b)]
            if len(sel) == 0:
                out[(a, b)] = Subdisc(v[:0], sel, (a, b), False, 0, 0,
                                      math.inf)
                continue
            connected, chi, loops = submesh_topology(sel)
            arc_a = lat.t_lower(idx.i + a * HALF)
            arc_b = lat.t_upper(idx.j + b * HALF)
            used = np.unique(sel)
            e = np.vstack([sel[:, [0, 1]], sel[:, [1, 2]], sel[:, [2, 0]]])
            e.sort(axis=1)
            uniq, counts = np.unique(e, axis=0, return_counts=True)
            bverts = np.unique(uniq[counts == 1])
            dev = 0.0
            for q in bverts:
                p = v[q]
                d = min(
                    math.asin(min(1.0, abs(float(p @ n_low)))),
                    math.asin(min(1.0, abs(float(p @ n_up)))),
                    s3.arc_distance(arc_a, arc_b, p),
                )
                dev = max(dev, d)
            out[(a, b)] = Subdisc(
                verts=v[used], tris=sel, side=(a, b), connected=connected,
                euler_characteristic=chi, boundary_loops=loops,
                boundary_structure_deviation=float(dev))
    return out


# -- graphicality -----------------------------------------------------------


@dataclass
class GraphicalReport:
    """Outcome of the orbit-projection checks on a disc mesh."""

    n_triangles: int
    orientation_sign: int
    min_abs_signed_area: float
    orientation_consistent: bool
    overlap_free: bool
    min_tangency_angle: float        # over triangles clear of the corners
    tangency_ok: bool
    tangency_flags: list             # corner-zone triangles under the tolerance
    boundary_image_deviation: float  # projected boundary verts vs projected quad
    quad_image_deviation: float      # projected quad vs boundary polyline
    pole_enclosed: bool
    winding: int
    orbit_samples: int
    orbit_hits_min: int
    orbit_hits_max: int
    orbit_resampled: int
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.orientation_consistent and self.overlap_free
                and self.tangency_ok and self.pole_enclosed
                and abs(self.winding) == 1
                and self.orbit_hits_min == 1 and self.orbit_hits_max == 1)

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["tangency_flags"] = [dict(f) for f in self.tangency_flags]
        d["warnings"] = list(self.warnings)
        return d


def _triangles_overlap(p: np.ndarray, q: np.ndarray) -> bool:
    """Strict interior overlap of two plane triangles via separating axes."""
    for tri, other in ((p, q), (q, p)):
        for k in range(3):
            edge = tri[(k + 1) % 3] - tri[k]
            n = np.array([-edge[1], edge[0]])
            a = tri @ n
            b = other @ n
            if a.max() <= b.min() or b.max() <= a.min():
                return False
    return True


def _winding_number(poly: np.ndarray, pt: np.ndarray) -> int:
    """Signed crossing count of the upward ray from pt with the closed poly."""
    x = poly[:, 0] - pt[0]
    y = poly[:, 1] - pt[1]
    x2 = np.roll(x, -1)
    y2 = np.roll(y, -1)
    wind = 0
    for k in range(len(poly)):
        if (x[k] <= 0) != (x2[k] <= 0):
            # y-coordinate of the segment where it crosses x = 0
            tcr = x[k] / (x[k] - x2[k])
            ycr = y[k] + tcr * (y2[k] - y[k])
            if ycr > 0:
                wind += 1 if x[k] <= 0 else -1
    return wind


def verify_graphical(mesh: TriMeshS3, lat: Lattice,
                     idx: CellIndex | None = None,
                     n_orbits: int = 512,
                     tangency_tol: float = 1e-4,
                     rng=None) -> GraphicalReport:
    """Check that the rotation orbits along the cell axis meet the disc once.

    Projects the mesh to the orbit-invariant plane coordinates and verifies
    (a) no two projected triangles overlap (raising GraphicalityError with a
    witness pair when they do), (b) the projected boundary traces the
    projected boundary quad and winds once around the axis pole, and (c) no
    triangle lies tangent to the orbit direction, except possibly inside the
    corner-exemption zone of twice the local edge length, where failures are
    flagged in the report instead.
    """
    if idx is None:
        idx = lat.cell("int", 0, 0)
    if rng is None:
        rng = np.random.default_rng(0)
    axis = lat.axis(idx)
    tet = lat.tetra(idx)
    quad = lat.boundary_parts(idx).quad
    warnings: list = []

    frame = np.column_stack([axis.f1, axis.f2])
    coords = mesh.verts @ frame
    tri2 = coords[mesh.tris]

    # (a) orientation consistency and pairwise overlap search
    e1 = tri2[:, 1] - tri2[:, 0]
    e2 = tri2[:, 2] - tri2[:, 0]
    signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    sign = 1 if float(np.sum(signed)) >= 0 else -1
    min_signed = float(np.min(sign * signed))
    orientation_ok = min_signed > 0.0

    centers = tri2.mean(axis=1, keepdims=True)
    shrunk = centers + (tri2 - centers) * (1.0 - 1e-9)
    lo = shrunk.min(axis=1)
    hi = shrunk.max(axis=1)
    cell = float(np.max(hi - lo)) + 1e-12
    buckets: dict = {}
    for ti in range(len(shrunk)):
        key = (int(lo[ti, 0] // cell), int(lo[ti, 1] // cell))
        buckets.setdefault(key, []).append(ti)
    overlap_free = True
    witness = None
    for (bx, by), members in buckets.items():
        cand = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(buckets.get((bx + dx, by + dy), []))
        for ti in members:
            for tj in cand:
                if tj <= ti:
                    continue
                if np.any(hi[ti] < lo[tj]) or np.any(hi[tj] < lo[ti]):
                    continue
                if _triangles_overlap(shrunk[ti], shrunk[tj]):
                    overlap_free = False
                    witness = (ti, tj)
                    break
            if witness:
                break
        if witness:
            break
    if witness is not None:
        raise GraphicalityError(
            f"projected triangles {witness[0]} and {witness[1]} overlap",
            witness=witness)

    # (c) angle between the orbit direction and each triangle plane
    gen = s3.killing_generator_along(axis)
    cent4 = mesh.verts[mesh.tris].mean(axis=1)
    cent4 /= np.linalg.norm(cent4, axis=1, keepdims=True)
    kvec = cent4 @ gen.T
    knorm = np.linalg.norm(kvec, axis=1, keepdims=True)
    kdir = kvec / np.maximum(knorm, 1e-300)
    d1 = mesh.verts[mesh.tris[:, 1]] - mesh.verts[mesh.tris[:, 0]]
    d2 = mesh.verts[mesh.tris[:, 2]] - mesh.verts[mesh.tris[:, 0]]
    b1 = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    d2p = d2 - np.einsum("ij,ij->i", d2, b1)[:, None] * b1
    b2 = d2p / np.linalg.norm(d2p, axis=1, keepdims=True)
    c1 = np.einsum("ij,ij->i", kdir, b1)
    c2 = np.einsum("ij,ij->i", kdir, b2)
    angles = np.arcsin(np.sqrt(np.clip(1.0 - c1 * c1 - c2 * c2, 0.0, 1.0)))

    edge_len = (np.linalg.norm(d1, axis=1) + np.linalg.norm(d2, axis=1)
                + np.linalg.norm(mesh.verts[mesh.tris[:, 2]]
                                 - mesh.verts[mesh.tris[:, 1]], axis=1)) / 3.0
    corner_dist = np.arccos(np.clip(cent4 @ quad.corners.T, -1.0, 1.0)).min(axis=1)
    exempt = corner_dist < 2.0 * edge_len
    tangency_flags = [
        {"triangle": int(ti), "angle": float(angles[ti]),
         "corner_distance": float(corner_dist[ti])}
        for ti in np.flatnonzero(exempt & (angles < tangency_tol))]
    clear = ~exempt
    min_angle = float(np.min(angles[clear])) if np.any(clear) else math.inf
    tangency_ok = min_angle >= tangency_tol
    if tangency_flags:
        warnings.append(
            f"{len(tangency_flags)} corner-zone triangles below the "
            f"tangency tolerance (expected near the quad corners)")

    # (b) boundary image against the projected quad, and the pole winding
    loop = mesh.boundary_loop()
    bpoly = coords[loop]
    qpts = quad.sample(2048) @ frame
    b_dev = float(np.max(_polyline_distance(bpoly, qpts)))
    q_dev = float(np.max(_polyline_distance(qpts, bpoly)))
    winding = _winding_number(bpoly, np.zeros(2))
    pole_enclosed = (abs(winding) == 1
                     and float(np.min(np.linalg.norm(bpoly, axis=1))) > 1e-9)

    # sampled orbits: each must meet the projected mesh exactly once
    hits_min, hits_max, resampled = math.inf, 0, 0
    got = 0
    tol = 1e-12 * (np.abs(signed) + 1e-300)
    while got < n_orbits:
        if resampled > 20 * n_orbits:
            warnings.append("orbit sampling kept landing on projected edges")
            break
        pts = tet.random_interior_points(n_orbits - got, rng)
        pc = pts @ frame
        for p in pc:
            r0 = tri2[:, 0] - p
            r1 = tri2[:, 1] - p
            r2 = tri2[:, 2] - p
            w0 = sign * (r0[:, 0] * r1[:, 1] - r0[:, 1] * r1[:, 0])
            w1 = sign * (r1[:, 0] * r2[:, 1] - r1[:, 1] * r2[:, 0])
            w2 = sign * (r2[:, 0] * r0[:, 1] - r2[:, 1] * r0[:, 0])
            on_closed = (w0 >= -tol) & (w1 >= -tol) & (w2 >= -tol)
            near_edge = np.minimum(np.minimum(np.abs(w0), np.abs(w1)),
                                   np.abs(w2)) < tol
            if np.any(on_closed & near_edge):
                resampled += 1       # ambiguous containment; draw a new orbit
                continue
            n_hit = int(np.count_nonzero((w0 > 0) & (w1 > 0) & (w2 > 0)))
            hits_min = min(hits_min, n_hit)
            hits_max = max(hits_max, n_hit)
            got += 1
    hits_min = 0 if math.isinf(hits_min) else int(hits_min)

    return GraphicalReport(
        n_triangles=len(mesh.tris),
        orientation_sign=sign,
        min_abs_signed_area=min_signed,
        orientation_consistent=orientation_ok,
        overlap_free=overlap_free,
        min_tangency_angle=min_angle,
        tangency_ok=tangency_ok,
        tangency_flags=tangency_flags,
        boundary_image_deviation=b_dev,
        quad_image_deviation=q_dev,
        pole_enclosed=pole_enclosed,
        winding=winding,
        orbit_samples=got,
        orbit_hits_min=hits_min,
        orbit_hits_max=int(hits_max),
        orbit_resampled=resampled,
        warnings=warnings,
    )


def _polyline_distance(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to a closed 2D polyline."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab) + 1e-300
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        ap = p[None, :] - a
        t = np.clip(np.einsum("ij,ij->i", ap, ab) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        out[i] = np.min(np.linalg.norm(proj - p[None, :], axis=1))
    return out


def minimize(mesh: TriMeshS3, lat: Lattice, idx: CellIndex,
             opts: SolverOptions) -> tuple[TriMeshS3, DiscReport]:
    """Constrained discrete Plateau solve on a copy of the mesh."""
    mesh = mesh.copy()
    mats = np.stack(lat.cell_group(idx.i, idx.j))
    perms = vertex_orbit_perms(mesh, mats)
    tet = lat.tetra(idx)
    x = mesh.verts
    free = ~mesh.boundary_mask
    bverts = x[mesh.boundary_mask].copy()
    tris = mesh.tris
    nbr_dst, nbr_off = vertex_neighbors(mesh)
    corners = lat.boundary_parts(idx).quad.corners
    area = total_area(x, tris)
    prev_x = x.copy()
    resets = 0
    remesh_events = 0
    max_remesh_increase = 0.0
    warnings: list = []
    mean_h = mesh.mean_edge_length()
    step0 = opts.step_factor * mean_h
    smoothing = opts.smooth_every > 0 and opts.smooth_weight > 0.0
    converged = False
    net_disp = math.inf
    it = 0
    use_momentum = opts.step_rule == "momentum"
    if opts.step_rule not in ("plain", "momentum"):
        raise ValueError(f"unknown step rule {opts.step_rule!r}")

    for it in range(1, opts.max_iter + 1):
        x_start = x
        grad = area_gradient(x, tris)
        grad -= np.einsum("ij,ij->i", grad, x)[:, None] * x
        grad[~free] = 0.0

        direction = -grad
        if use_momentum:
            direction = direction + opts.momentum / max(step0, 1e-300) * (x - prev_x)
            direction[~free] = 0.0

        accepted = False
        tried_plain = not use_momentum
        while True:
            step = step0
            for _ in range(opts.max_halvings):
                y = x + step * direction
                y /= np.linalg.norm(y, axis=1, keepdims=True)
                y[~free] = bverts
                new_area = total_area(y, tris)
                if new_area < area:
                    accepted = True
                    break
                step *= 0.5
            if accepted or tried_plain:
                break
            # retry once with the bare gradient before giving up
            direction = -grad
            prev_x = x.copy()
            resets += 1
            tried_plain = True

        if not accepted:
            # area differences are below float resolution; accept as
            # converged only if the full-step move is already negligible
            full_disp = float(np.max(np.linalg.norm(step0 * direction, axis=1)))
            if full_disp < 1e-6:
                converged = True
                break
            raise LineSearchError("area increases under the minimal step")

        y = symmetrize(y, mats, perms)
        y[~free] = bverts
        new_area = total_area(y, tris)
        # a momentum direction that survives only after deep step halving is
        # an overshoot, and its tiny displacement says nothing about
        # convergence; restart the momentum and ignore this displacement
        trusted = True
        if use_momentum and not tried_plain and step < step0 / 64.0:
            trusted = False
            prev_x = y
        else:
            prev_x = x
        x = y
        area = new_area

        # maintenance between iterations: tangential vertex redistribution
        # keeps the parameterization from collapsing; it does not change the
        # descent accounting (its small area effect is recorded separately)
        if smoothing and it % opts.smooth_every == 0:
            z = x
            for _ in range(opts.smooth_passes):
                nu = normals_of(z, tris)
                rho = None
                if opts.grade_strength > 0.0:
                    d2 = np.arccos(np.clip(z @ corners.T, -1.0, 1.0)).min(axis=1) ** 2
                    rho = 1.0 + opts.grade_strength * np.exp(
                        -d2 / (2.0 * opts.grade_scale ** 2))
                z = tangential_smooth(z, nbr_dst, nbr_off, nu, free,
                                      opts.smooth_weight, rho)
                z[~free] = bverts
            z = symmetrize(z, mats, perms)
            z[~free] = bverts
            remesh_area = total_area(z, tris)
            max_remesh_increase = max(max_remesh_increase, remesh_area - area)
            x = z
            area = remesh_area
            remesh_events += 1

        # descent and maintenance pull against each other; the state has
        # settled exactly when the net per-iteration move is negligible
        net_disp = float(np.max(np.linalg.norm(x - x_start, axis=1)))
        if trusted and net_disp < opts.grad_tol:
            converged = True
            break

    mesh.verts = x
    mesh.orbit_tags = perms.min(axis=0)
    min_margin = float(np.min(tet.margin(x)))
    if min_margin < -opts.containment_tol:
        warnings.append(f"containment violated: min margin {min_margin:.3e}")
    curves = None
    try:
        curves = extract_curves(mesh, lat, idx)
    except CurveTopologyError as exc:
        warnings.append(f"curve extraction failed: {exc}")
    res = mean_curvature_residual(mesh)
    report = DiscReport(
        level=mesh.level,
        iterations=it,
        converged=converged,
        area_chordal=total_area(x, tris),
        area_spherical=total_spherical_area(x, tris),
        max_residual=float(np.max(res)),
        boundary_deviation=boundary_deviation(mesh, lat, idx),
        symmetry_deviation=symmetry_deviation(x, mats, perms),
        last_displacement=net_disp if math.isfinite(net_disp) else 0.0,
        min_triangle_area=float(np.min(tri_areas(x, tris))),
        min_containment_margin=min_margin,
        line_search_resets=resets,
        remesh_events=remesh_events,
        max_remesh_area_increase=max_remesh_increase,
        axis_point=None if curves is None else curves.x,
        curves=curves,
        warnings=warnings,
    )
    return mesh, report


def solve_disc(lat: Lattice, level: int, opts: SolverOptions | None = None,
               idx: CellIndex | None = None, start_level: int = 2):
    """Cascadic solve: minimize at a coarse level, subdivide, re-minimize,
    up to the requested level. Returns {level: (mesh, report)}."""
    if opts is None:
        opts = SolverOptions(level=level)
    if idx is None:
        idx = lat.cell("int", 0, 0)
    start = min(level, start_level)
    mesh = initial_disc(lat, start, idx)
    out = {}
    mesh, rep = minimize(mesh, lat, idx, opts)
    out[start] = (mesh, rep)
    for lv in range(start + 1, level + 1):
        mesh = subdivide(mesh)
        mesh, rep = minimize(mesh, lat, idx, opts)
        out[lv] = (mesh, rep)
    return out
