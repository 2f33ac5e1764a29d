"""Closed surfaces assembled from copies of the minimized disc.

The disc sits in one cell of the integer family. Moving it around by the
half-turn group of the quad circles produces one copy per even cell; welding
coincident boundary vertices yields a closed oriented triangle mesh. The
routines here build that mesh, verify its topology, probe the predicted
umbilic points, audit the corner angles cell by cell, and classify how each
symmetry of the tessellation acts on the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import s3
from .groups import FiniteGroup, closure_cap
from .lattice import HALF, CellIndex, Lattice
from .plateau import TriMeshS3, cut_by_plane, normals_of, submesh_topology


class WeldError(RuntimeError):
    """Copies failed to close up into a surface; carries a witness."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class InvalidMeshError(RuntimeError):
    pass


class ProbeMissError(RuntimeError):
    pass


# -- assembly ---------------------------------------------------------------


@dataclass
class ClosedSurfaceMesh:
    """Welded union of group copies of the disc.

    copy_of maps each triangle to the copy it came from, and cells names the
    even cell housing each copy, so every triangle can be traced back to a
    cell of the tessellation.
    """

    verts: np.ndarray            # (n, 4) unit vectors
    tris: np.ndarray             # (t, 3) consistently oriented
    copy_of: np.ndarray          # (t,) copy index
    cells: list                  # copy index -> CellIndex (even family)
    weld_tol: float
    cluster_sizes: dict          # weld cluster size -> count
    n_copies: int

    @property
    def n_verts(self) -> int:
        return len(self.verts)

    @property
    def n_tris(self) -> int:
        return len(self.tris)

    def edges(self) -> np.ndarray:
        e = np.vstack([self.tris[:, [0, 1]], self.tris[:, [1, 2]],
                       self.tris[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self) -> int:
        return self.n_verts - len(self.edges()) + self.n_tris

    def to_json_dict(self) -> dict:
        return {
            "n_verts": self.n_verts,
            "n_tris": self.n_tris,
            "n_copies": self.n_copies,
            "weld_tol": self.weld_tol,
            "cluster_sizes": {str(s): c for s, c in
                              sorted(self.cluster_sizes.items())},
            "cells": [[str(c.i), str(c.j)] for c in self.cells],
            "euler_characteristic": self.euler_characteristic(),
        }


def _locate_even_cell(lat: Lattice, pts: np.ndarray) -> CellIndex:
    best, best_margin = None, -math.inf
    for idx in lat.cells("even"):
        margin = float(lat.tetra(idx).margin(pts).min())
        if margin > best_margin:
            best, best_margin = idx, margin
    if best_margin < -1e-6:
        raise WeldError(
            f"a disc copy is not contained in any even cell "
            f"(worst margin {best_margin:.3e})", witness=best)
    return best


def _orient_consistently(tris: np.ndarray) -> np.ndarray:
    """Flip triangles so every shared edge is traversed in both directions.

    Breadth-first over the triangle adjacency graph; raises InvalidMeshError
    when no consistent orientation exists.
    """
    edge_tris: dict = {}
    for t, tri in enumerate(tris):
        for a in range(3):
            u, v = int(tri[a]), int(tri[(a + 1) % 3])
            edge_tris.setdefault((u, v) if u < v else (v, u), []).append(t)
    for key, owners in edge_tris.items():
        if len(owners) > 2:
            raise InvalidMeshError(f"edge {key} lies in {len(owners)} triangles")

    out = tris.copy()
    flipped = np.zeros(len(tris), dtype=bool)
    visited = np.zeros(len(tris), dtype=bool)
    for seed in range(len(tris)):
        if visited[seed]:
            continue
        visited[seed] = True
        stack = [seed]
        while stack:
            t = stack.pop()
            dirs = {}
            tri = out[t]
            for a in range(3):
                u, v = int(tri[a]), int(tri[(a + 1) % 3])
                dirs[(u, v) if u < v else (v, u)] = (u, v)
            for key, uv in dirs.items():
                for s in edge_tris[key]:
                    if s == t:
                        continue
                    tri_s = out[s]
                    same_dir = any(
                        (int(tri_s[a]), int(tri_s[(a + 1) % 3])) == uv
                        for a in range(3))
                    if not visited[s]:
                        if same_dir:
                            out[s] = tri_s[::-1]
                            flipped[s] = True
                        visited[s] = True
                        stack.append(s)
                    elif same_dir:
                        raise InvalidMeshError(
                            "mesh is not orientable: conflicting directions "
                            f"along edge {key}")
    return out


def assemble(lat: Lattice, mesh: TriMeshS3, grp: FiniteGroup | None = None,
             weld_tol: float = 1e-7) -> ClosedSurfaceMesh:
    """Weld the group orbit of a solved disc into a closed surface.

    grp defaults to the closure of the quad-circle half-turns, which moves
    the disc simply transitively over the even cells. Welding only ever
    merges boundary vertices of distinct copies; an interior vertex landing
    in a weld cluster means the tolerance is wrong and raises WeldError.
    """
    if grp is None:
        gens = [c.reflection() for _, c in lat.circles_quad()]
        grp = FiniteGroup.close(gens, closure_cap(lat), "quad-half-turns")

    n_copies = grp.order
    nv, nt = len(mesh.verts), len(mesh.tris)
    verts_all = np.concatenate([mesh.verts @ g.T for g in grp.mats])
    tris_all = np.concatenate([mesh.tris + c * nv for c in range(n_copies)])
    copy_of = np.repeat(np.arange(n_copies), nt)
    boundary_all = np.tile(mesh.boundary_mask, n_copies)

    cells = [_locate_even_cell(lat, verts_all[c * nv:(c + 1) * nv])
             for c in range(n_copies)]
    seen = {(c.i, c.j) for c in cells}
    if len(seen) != n_copies:
        raise WeldError(f"copies occupy {len(seen)} distinct even cells, "
                        f"expected {n_copies}")

    # union-find weld of near-coincident vertices
    pairs = cKDTree(verts_all).query_pairs(weld_tol, output_type="ndarray")
    parent = np.arange(len(verts_all))

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for a, b in pairs:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(int(a)) for a in range(len(verts_all))])

    uniq_roots, inverse, counts = np.unique(
        roots, return_inverse=True, return_counts=True)
    merged = counts[inverse] > 1
    bad = merged & ~boundary_all
    if bad.any():
        w = int(np.flatnonzero(bad)[0])
        raise WeldError(
            f"interior vertex {w} of copy {w // nv} welded to another "
            f"vertex; weld_tol {weld_tol:g} is inconsistent with the mesh",
            witness=w)

    new_verts = np.zeros((len(uniq_roots), 4))
    np.add.at(new_verts, inverse, verts_all)
    new_verts /= np.linalg.norm(new_verts, axis=1, keepdims=True)
    new_tris = inverse[tris_all]

    if (new_tris[:, 0] == new_tris[:, 1]).any() or \
       (new_tris[:, 1] == new_tris[:, 2]).any() or \
       (new_tris[:, 2] == new_tris[:, 0]).any():
        raise WeldError("welding collapsed a triangle; weld_tol too large")

    e = np.vstack([new_tris[:, [0, 1]], new_tris[:, [1, 2]],
                   new_tris[:, [2, 0]]])
    e.sort(axis=1)
    uniq_e, counts_e = np.unique(e, axis=0, return_counts=True)
    if (counts_e != 2).any():
        w = uniq_e[counts_e != 2][0]
        raise WeldError(
            f"edge {tuple(int(q) for q in w)} lies in "
            f"{int(counts_e[counts_e != 2][0])} triangles after welding; "
            "the copies did not close up", witness=tuple(int(q) for q in w))

    new_tris = _orient_consistently(new_tris)

    sizes: dict = {}
    for c in counts:
        sizes[int(c)] = sizes.get(int(c), 0) + 1
    return ClosedSurfaceMesh(
        verts=new_verts, tris=new_tris, copy_of=copy_of, cells=cells,
        weld_tol=weld_tol, cluster_sizes=sizes, n_copies=n_copies)


# -- topology ----------------------------------------------------------------


@dataclass
class TopologyReport:
    n_verts: int
    n_edges: int
    n_tris: int
    euler_characteristic: int
    genus: int
    connected: bool
    closed: bool
    orientable: bool

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def topology(surf: ClosedSurfaceMesh) -> TopologyReport:
    """Independent topology audit of the assembled mesh.

    Recomputes connectivity, closedness and orientability from scratch
    rather than trusting the assembly invariants.
    """
    connected, chi, loops = submesh_topology(surf.tris)
    closed = loops == 0
    try:
        _orient_consistently(surf.tris)
        orientable = True
    except InvalidMeshError:
        orientable = False
    if closed and chi % 2 != 0:
        raise InvalidMeshError(f"closed surface with odd Euler number {chi}")
    genus = (2 - chi) // 2 if closed else -1
    return TopologyReport(
        n_verts=surf.n_verts, n_edges=len(surf.edges()), n_tris=surf.n_tris,
        euler_characteristic=chi, genus=genus, connected=connected,
        closed=closed, orientable=orientable)


# -- curvature isotropy / umbilics -------------------------------------------


def _vertex_rings(tris: np.ndarray, n_verts: int):
    nbr: list = [set() for _ in range(n_verts)]
    for a, b, c in tris:
        nbr[a].update((b, c))
        nbr[b].update((a, c))
        nbr[c].update((a, b))
    return nbr


def principal_gap(verts: np.ndarray, tris: np.ndarray,
                  at: np.ndarray) -> np.ndarray:
    """|kappa_1 - kappa_2| at the given vertices from a two-ring quadric fit.

    The ambient sphere bends both principal directions equally, so the gap
    of the chordal quadric fit still vanishes exactly at umbilic points.
    """
    nbr = _vertex_rings(tris, len(verts))
    normals = normals_of(verts, tris)
    out = np.zeros(len(at))
    for pos, vid in enumerate(np.asarray(at, dtype=int)):
        ring = set(nbr[vid])
        for q in list(ring):
            ring.update(nbr[q])
        ring.discard(int(vid))
        pts = verts[sorted(ring)]

        v = verts[vid]
        nu = normals[vid]
        nu = nu - float(nu @ v) * v
        nu /= np.linalg.norm(nu)
        t1 = pts[0] - v
        t1 -= float(t1 @ v) * v + float(t1 @ nu) * nu
        t1 /= np.linalg.norm(t1)
        t2 = s3.cross4(v, nu, t1)

        d = pts - v
        u = d @ t1
        w = d @ t2
        h = d @ nu
        design = np.column_stack(
            [u, w, u * u, u * w, w * w, np.ones_like(u)])
        coef, *_ = np.linalg.lstsq(design, h, rcond=None)
        c0, c1 = coef[0], coef[1]
        hess = np.array([[2 * coef[2], coef[3]], [coef[3], 2 * coef[4]]])
        g = np.array([[1 + c0 * c0, c0 * c1], [c0 * c1, 1 + c1 * c1]])
        shape = np.linalg.solve(g, hess) / math.sqrt(1 + c0 * c0 + c1 * c1)
        tr = shape[0, 0] + shape[1, 1]
        det = shape[0, 0] * shape[1, 1] - shape[0, 1] * shape[1, 0]
        out[pos] = math.sqrt(max(0.0, tr * tr - 4 * det))
    return out


@dataclass
class UmbilicCandidate:
    kind: str                 # "upper" for t^j, "lower" for t_i
    index: Fraction
    point: np.ndarray
    vertex: int
    gap: float
    percentile: float

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "index": str(self.index),
                "point": self.point.tolist(), "vertex": self.vertex,
                "gap": self.gap, "percentile": self.percentile}


@dataclass
class UmbilicReport:
    candidates: list
    expected_count: int
    degrees: dict             # kind -> predicted degree of each umbilic
    total_degree: int         # sum over candidates, should be 4g - 4
    sample_gaps: np.ndarray
    threshold_percentile: float
    all_below: bool
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "candidates": [c.to_json_dict() for c in self.candidates],
            "expected_count": self.expected_count,
            "degrees": dict(self.degrees),
            "total_degree": self.total_degree,
            "sample_gap_median": float(np.median(self.sample_gaps)),
            "sample_gap_p5": float(np.percentile(self.sample_gaps, 5.0)),
            "threshold_percentile": self.threshold_percentile,
            "all_below": self.all_below,
            "warnings": list(self.warnings),
        }


def umbilic_probe(surf: ClosedSurfaceMesh, lat: Lattice,
                  n_samples: int = 1000, percentile: float = 5.0,
                  rng=None) -> UmbilicReport:
    """Probe curvature isotropy at the predicted umbilic points.

    Candidates are the half-integer points of the upper circle, plus those
    of the lower circle when k > 2; for k = 2 the lower points are regular.
    Each candidate's principal-curvature gap is ranked against the gap at
    random mesh vertices; umbilics should land in the lowest percentile.
    The comparison is relative by design: the fit gap never vanishes exactly
    on a discrete mesh.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    m, k = lat.m, lat.k

    targets = [("upper", HALF + n, lat.t_upper(HALF + n))
               for n in range(2 * k)]
    degrees = {"upper": m - 2}
    if k > 2:
        targets += [("lower", HALF + n, lat.t_lower(HALF + n))
                    for n in range(2 * m)]
        degrees["lower"] = k - 2

    tree = cKDTree(surf.verts)
    cand_vids = []
    for kind, idx, p in targets:
        dist, vid = tree.query(p)
        if dist > 1e-6:
            raise ProbeMissError(
                f"no mesh vertex at {kind} point {idx} (nearest {dist:.3e})")
        cand_vids.append(int(vid))

    warnings: list = []
    pool = np.setdiff1d(np.arange(surf.n_verts), np.array(cand_vids))
    n_samples = min(n_samples, len(pool))
    sample_vids = rng.choice(pool, size=n_samples, replace=False)

    gaps = principal_gap(surf.verts, surf.tris,
                         np.concatenate([cand_vids, sample_vids]))
    cand_gaps, sample_gaps = gaps[:len(cand_vids)], gaps[len(cand_vids):]

    candidates = []
    for (kind, idx, p), vid, gap in zip(targets, cand_vids, cand_gaps):
        pct = 100.0 * float(np.mean(sample_gaps < gap))
        candidates.append(UmbilicCandidate(
            kind=kind, index=idx, point=p, vertex=vid,
            gap=float(gap), percentile=pct))

    genus = topology(surf).genus
    total = sum(degrees[c.kind] for c in candidates)
    if total != 4 * genus - 4:
        warnings.append(
            f"degree sum {total} != 4g-4 = {4 * genus - 4}")
    all_below = all(c.percentile < percentile for c in candidates)
    return UmbilicReport(
        candidates=candidates, expected_count=len(targets),
        degrees=degrees, total_degree=total, sample_gaps=sample_gaps,
        threshold_percentile=percentile, all_below=all_below,
        warnings=warnings)


# -- cell-by-cell corner audit ------------------------------------------------


@dataclass
class CellAudit:
    """Corner bookkeeping for the surface piece inside one half cell."""

    cell: CellIndex
    n_tris: int
    connected: bool
    euler_characteristic: int
    boundary_components: int          # b-tilde
    doubled_genus: int                # g-tilde
    crossings: list                   # dicts: edge, point, angles
    edge_counts: list                 # crossings per cell edge, length 6
    angle_sum_measured: float         # sum of (pi - corner angle)
    angle_sum_analytic: float
    target: float
    residual: float                   # |measured - target|
    classification: str               # "quadrilateral" | "pentagon" | "other"

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["cell"] = [str(self.cell.i), str(self.cell.j)]
        d["crossings"] = [
            {"edge": c["edge"], "point": c["point"].tolist(),
             "theta_measured": c["theta_measured"],
             "theta_analytic": c["theta_analytic"]}
            for c in self.crossings]
        return d


@dataclass
class LedgerReport:
    cells: list
    max_residual: float
    counts_ok: bool          # every cell: b=1, g=0, 4 crossings
    all_quadrilateral: bool

    def to_json_dict(self) -> dict:
        return {
            "cells": [c.to_json_dict() for c in self.cells],
            "max_residual": self.max_residual,
            "counts_ok": self.counts_ok,
            "all_quadrilateral": self.all_quadrilateral,
        }


# tetra edge pairs that do not share a vertex
_OPPOSITE = {0: 1, 1: 0, 2: 5, 5: 2, 3: 4, 4: 3}


def _classify(edge_counts) -> str:
    total = sum(edge_counts)
    hit = [e for e in range(6) if edge_counts[e] > 0]
    if total == 4 and len(hit) == 4:
        missed = [e for e in range(6) if edge_counts[e] == 0]
        if (len(missed) == 2 and _OPPOSITE[missed[0]] == missed[1]
                and 0 not in missed and 1 not in missed):
            return "quadrilateral"
    if total == 5 and len(hit) == 4 and max(edge_counts) == 2:
        return "pentagon"
    return "other"


def _cell_piece(surf: ClosedSurfaceMesh, tet, cull_margin: float,
                snap_tol: float):
    """Triangles of the surface clipped to the (closed) cell tetrahedron."""
    coeffs = np.stack([surf.verts @ n for n in tet.inward_normals()], axis=1)
    margin = coeffs.min(axis=1)
    keep = margin[surf.tris].max(axis=1) > -cull_margin
    v, t = surf.verts, surf.tris[keep]
    for n in tet.inward_normals():
        v, t = cut_by_plane(v, t, n, snap_tol)
    cent = v[t].mean(axis=1)
    cent /= np.linalg.norm(cent, axis=1, keepdims=True)
    inside = tet.margin(cent) > 0
    return v, t[inside]


def _corner_angle(v: np.ndarray, tris: np.ndarray, vid: int,
                  at: np.ndarray) -> float:
    """Total angle of the triangles meeting at vid, in the tangent space."""
    total = 0.0
    for tri in tris:
        if vid not in tri:
            continue
        a, b = [int(q) for q in tri if int(q) != vid]
        u = v[a] - float(v[a] @ at) * at
        w = v[b] - float(v[b] @ at) * at
        c = float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w))
        total += math.acos(max(-1.0, min(1.0, c)))
    return total


def ledger(surf: ClosedSurfaceMesh, lat: Lattice,
           edge_tol: float = 1e-6, snap_tol: float = 1e-9) -> LedgerReport:
    """Audit the surface piece in every half-integer cell.

    For each cell: clip the surface to the cell, measure the topology of the
    piece, find where its boundary crosses the cell edges, and compare the
    corner-angle deficit against the combinatorial target

        sum over crossings of (pi - theta) =
            (5 - 2g - 2b - 1/k - 1/m) pi,

    with the angles measured directly on the mesh. The analytic dihedral
    angles of the cell are recorded alongside for reference. Pieces are also
    classified by which edges their crossings miss: missing one opposite
    pair off the two distinguished circles is the quadrilateral case.
    """
    edge_len = np.linalg.norm(
        surf.verts[surf.tris[:, 0]] - surf.verts[surf.tris[:, 1]],
        axis=1).max()

    audits = []
    for idx in lat.cells("half"):
        tet = lat.tetra(idx)
        v, t = _cell_piece(surf, tet, 4.0 * edge_len, snap_tol)
        if len(t) == 0:
            raise InvalidMeshError(f"no surface piece in cell {idx}")
        connected, chi, loops = submesh_topology(t)
        if loops < 0:
            raise InvalidMeshError(f"piece boundary in cell {idx} is not a "
                                   "union of simple cycles")
        doubled_genus = 2 - chi - loops
        if doubled_genus % 2 != 0 or doubled_genus < 0:
            raise InvalidMeshError(
                f"piece in cell {idx} has chi={chi}, b={loops}")

        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        bverts = np.unique(uniq[counts == 1])

        crossings = []
        edge_counts = [0] * 6
        for eidx in range(6):
            a, b = tet.edge_vertices(eidx)
            for q in bverts:
                if s3.arc_distance(a, b, v[q]) < edge_tol:
                    theta = _corner_angle(v, t, int(q), v[q])
                    crossings.append({
                        "edge": eidx, "vertex": int(q), "point": v[q],
                        "theta_measured": theta,
                        "theta_analytic": tet.dihedral_angle(eidx)})
                    edge_counts[eidx] += 1

        measured = sum(math.pi - c["theta_measured"] for c in crossings)
        analytic = sum(math.pi - c["theta_analytic"] for c in crossings)
        target = (5.0 - 2.0 * doubled_genus - 2.0 * loops
                  - 1.0 / lat.k - 1.0 / lat.m) * math.pi

        audits.append(CellAudit(
            cell=idx, n_tris=len(t), connected=connected,
            euler_characteristic=chi, boundary_components=loops,
            doubled_genus=doubled_genus, crossings=crossings,
            edge_counts=edge_counts, angle_sum_measured=measured,
            angle_sum_analytic=analytic, target=target,
            residual=abs(measured - target),
            classification=_classify(edge_counts)))

    return LedgerReport(
        cells=audits,
        max_residual=max(a.residual for a in audits),
        counts_ok=all(a.boundary_components == 1 and a.doubled_genus == 0
                      and sum(a.edge_counts) == 4 for a in audits),
        all_quadrilateral=all(a.classification == "quadrilateral"
                              for a in audits))


# -- symmetry audit -----------------------------------------------------------


@dataclass
class ElementAudit:
    index: int
    deviation: float          # nearest-vertex transport error
    det: float
    preserves_sides: bool
    preserves_surface_orientation: bool
    sides_margin: float       # min |normal agreement| over vertices

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SymmetryReport:
    elements: list
    max_deviation: float
    sides_indices: list
    orientation_indices: list
    rotation_indices: list

    def to_json_dict(self) -> dict:
        return {
            "elements": [e.to_json_dict() for e in self.elements],
            "max_deviation": self.max_deviation,
            "sides_indices": list(self.sides_indices),
            "orientation_indices": list(self.orientation_indices),
            "rotation_indices": list(self.rotation_indices),
        }


def symmetry_check(surf: ClosedSurfaceMesh, grp: FiniteGroup,
                   tol: float = 1e-6) -> SymmetryReport:
    """How each group element acts on the assembled surface.

    For every element: transport all vertices, match them to nearest mesh
    vertices (the deviation is the worst mismatch), and compare the
    transported normal field against the field at the matched vertices.
    An element preserves the sides when the normals agree everywhere, and
    preserves the orientation of the surface when its ambient determinant
    times the sides sign is positive.
    """
    normals = normals_of(surf.verts, surf.tris)
    tree = cKDTree(surf.verts)
    dets = grp.dets()

    elements = []
    for gi, g in enumerate(grp.mats):
        moved = surf.verts @ g.T
        dist, match = tree.query(moved)
        deviation = float(dist.max())
        if deviation > tol:
            raise InvalidMeshError(
                f"element {gi} does not map the vertex set to itself "
                f"(worst mismatch {deviation:.3e} > {tol:g})")
        moved_normals = normals @ g.T
        agree = np.einsum("ij,ij->i", moved_normals, normals[match])
        sides = bool((agree > 0).all())
        reverses = bool((agree < 0).all())
        if not sides and not reverses:
            raise InvalidMeshError(
                f"element {gi} maps the normal field inconsistently "
                f"(agreement range [{agree.min():.3f}, {agree.max():.3f}])")
        sign = 1.0 if sides else -1.0
        det = float(dets[gi])
        elements.append(ElementAudit(
            index=gi, deviation=deviation, det=det,
            preserves_sides=sides,
            preserves_surface_orientation=det * sign > 0,
            sides_margin=float(np.abs(agree).min())))

    return SymmetryReport(
        elements=elements,
        max_deviation=max(e.deviation for e in elements),
        sides_indices=[e.index for e in elements if e.preserves_sides],
        orientation_indices=[e.index for e in elements
                             if e.preserves_surface_orientation],
        rotation_indices=[e.index for e in elements if e.det > 0])
