"""Finite isometry groups generated by lattice reflections.

Groups are materialized as explicit lists of orthogonal 4x4 matrices with a
full multiplication table. Closure is breadth-first from the generators with
a lexicographic tie-break inside each level, so element ordering is
deterministic for a given generator list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import s3
from .lattice import Lattice, CellIndex

EQUAL_TOL = 1e-8


class ClosureOverflowError(RuntimeError):
    """Generated more elements than the configured cap."""


class NotAnActionError(RuntimeError):
    """A group element failed to permute the cells of a family."""


class FiniteGroup:
    """A finite matrix group with element list and multiplication table."""

    def __init__(self, mats: np.ndarray, name: str = ""):
        self.mats = np.asarray(mats, dtype=float)
        self.name = name
        self.table = self._build_table()
        self.identity_index = self.index_of(np.eye(4))

    @property
    def order(self) -> int:
        return len(self.mats)

    @classmethod
    def close(cls, generators, cap: int, name: str = "") -> "FiniteGroup":
        """BFS closure of the generators (identity included)."""
        gens = [np.asarray(g, dtype=float) for g in generators]
        elems = [np.eye(4)]
        flat = np.eye(4).reshape(1, 16)
        frontier = [np.eye(4)]
        while frontier:
            new = []
            for g in frontier:
                for s in gens:
                    h = g @ s
                    d = np.abs(flat - h.reshape(1, 16)).max(axis=1)
                    if d.min() > EQUAL_TOL:
                        new.append(h)
                        flat = np.vstack([flat, h.reshape(16)])
                        if len(flat) > cap:
                            raise ClosureOverflowError(
                                f"closure exceeded cap {cap} elements")
            new.sort(key=lambda m: tuple(np.round(m.reshape(16), 9)))
            # the sort may have let near-duplicates in via different paths;
            # flat already dedups, so rebuild the frontier from it
            elems.extend(new)
            frontier = new
        return cls(np.stack(elems), name=name)

    @classmethod
    def from_elements(cls, mats, name: str = "") -> "FiniteGroup":
        return cls(np.stack([np.asarray(m, float) for m in mats]), name=name)

    def _build_table(self) -> np.ndarray:
        n = self.order
        table = np.empty((n, n), dtype=np.int32)
        flat = self.mats.reshape(n, 16)
        for a in range(n):
            prods = np.einsum("ij,bjk->bik", self.mats[a], self.mats).reshape(n, 16)
            # nearest element per product
            d = np.abs(prods[:, None, :] - flat[None, :, :]).max(axis=2)
            idx = d.argmin(axis=1)
            if d[np.arange(n), idx].max() > EQUAL_TOL:
                raise ValueError("set of elements is not closed under products")
            table[a] = idx
        return table

    def index_of(self, mat: np.ndarray, tol: float = EQUAL_TOL) -> int:
        d = np.abs(self.mats - np.asarray(mat, float)[None]).reshape(self.order, 16).max(axis=1)
        i = int(d.argmin())
        if d[i] > tol:
            raise KeyError("matrix is not an element of the group")
        return i

    def contains_matrix(self, mat: np.ndarray, tol: float = EQUAL_TOL) -> bool:
        try:
            self.index_of(mat, tol)
            return True
        except KeyError:
            return False

    def inverse_index(self, i: int) -> int:
        return int(np.flatnonzero(self.table[i] == self.identity_index)[0])

    def dets(self) -> np.ndarray:
        return np.linalg.det(self.mats)

    def element_order(self, i: int) -> int:
        j, n = i, 1
        while j != self.identity_index:
            j = self.table[j, i]
            n += 1
        return n

    def subset_indices_in(self, other: "FiniteGroup", tol: float = EQUAL_TOL):
        """Map each of our elements to its index in `other`; None if absent."""
        out = []
        oflat = other.mats.reshape(other.order, 16)
        for m in self.mats:
            d = np.abs(oflat - m.reshape(1, 16)).max(axis=1)
            i = int(d.argmin())
            out.append(i if d[i] <= tol else None)
        return out

    def is_subgroup_of(self, other: "FiniteGroup") -> bool:
        return all(i is not None for i in self.subset_indices_in(other))

    def same_group(self, other: "FiniteGroup") -> bool:
        return self.order == other.order and self.is_subgroup_of(other)

    def intersection(self, other: "FiniteGroup", name: str = "") -> "FiniteGroup":
        keep = [m for m, i in zip(self.mats, self.subset_indices_in(other))
                if i is not None]
        return FiniteGroup.from_elements(keep, name=name)

    def is_abelian(self) -> bool:
        return bool(np.all(self.table == self.table.T))

    def order_profile(self) -> dict:
        prof: dict = {}
        for i in range(self.order):
            o = self.element_order(i)
            prof[o] = prof.get(o, 0) + 1
        return prof

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "elements": [[float(x) for x in m.reshape(16)] for m in self.mats],
            "table": self.table.tolist(),
        }


@dataclass
class NamedGroups:
    """The standard groups attached to an (m, k) lattice."""

    lat: Lattice
    full: FiniteGroup                  # all lattice symmetries preserving the base circle pair
    sphere_reflections: FiniteGroup    # generated by the k+m sphere reflections
    quad_half_turns: FiniteGroup       # generated by half-turns about the surface circles
    axis_half_turns: FiniteGroup       # generated by half-turns about the axis circles
    circle_half_turns: FiniteGroup     # generated by all 2km circle half-turns
    orientation_preserving: FiniteGroup

    def all_named(self):
        return [self.full, self.sphere_reflections, self.quad_half_turns,
                self.axis_half_turns, self.circle_half_turns,
                self.orientation_preserving]


def closure_cap(lat: Lattice) -> int:
    return 16 * lat.k * lat.m * 10


def build_named_groups(lat: Lattice) -> NamedGroups:
    cap = closure_cap(lat)
    gens_sigma = [s.reflection() for _, s in lat.spheres()]
    gens_quad = [c.reflection() for (_, _), c in lat.circles_quad()]
    gens_axes = [c.reflection() for (_, _), c in lat.circles_axes()]
    gens_plus = gens_axes + [cq @ sg for cq in gens_quad for sg in gens_sigma]
    return NamedGroups(
        lat=lat,
        full=FiniteGroup.close(gens_sigma + gens_quad + gens_axes, cap, "full"),
        sphere_reflections=FiniteGroup.close(gens_sigma, cap, "sphere-reflections"),
        quad_half_turns=FiniteGroup.close(gens_quad, cap, "quad-half-turns"),
        axis_half_turns=FiniteGroup.close(gens_axes, cap, "axis-half-turns"),
        circle_half_turns=FiniteGroup.close(gens_quad + gens_axes, cap, "circle-half-turns"),
        orientation_preserving=FiniteGroup.close(gens_plus, cap, "orientation-preserving"),
    )


def exchange_element(lat: Lattice) -> np.ndarray:
    """For m = k: the isometry swapping the two base circles by exchanging
    coordinate pairs (x1,x2) <-> (x3,x4)."""
    if lat.m != lat.k:
        raise ValueError("exchange element needs m == k")
    p = np.zeros((4, 4))
    p[0, 2] = p[1, 3] = p[2, 0] = p[3, 1] = 1.0
    return p


def exchange_extension(lat: Lattice, full: FiniteGroup) -> FiniteGroup:
    """Closure of the full group together with the exchange element."""
    gens = list(full.mats) + [exchange_element(lat)]
    return FiniteGroup.close(gens, 2 * closure_cap(lat), "full+exchange")


@dataclass
class GroupAction:
    """A certified action of a group on the cells of one family."""

    group: FiniteGroup
    family: str
    cells: list
    perms: np.ndarray            # (order, n_cells) permutation table
    orbits: list                 # list of frozensets of cell positions
    stabilizer_orders: np.ndarray

    @property
    def transitive(self) -> bool:
        return len(self.orbits) == 1

    @property
    def simply_transitive(self) -> bool:
        return self.transitive and bool(np.all(self.stabilizer_orders == 1))


def act(group: FiniteGroup, lat: Lattice, family: str) -> GroupAction:
    """Certify that the group permutes the closed cells of the family and
    return the permutation action. Raises NotAnActionError otherwise."""
    cells = lat.cells(family)
    tets = [lat.tetra(c) for c in cells]
    cents = np.stack([t.centroid() for t in tets])
    verts = np.stack([t.verts for t in tets])  # (n_c, 4, 4)
    n_c = len(cells)
    n_g = group.order
    perms = np.empty((n_g, n_c), dtype=np.int32)
    for a in range(n_g):
        g = group.mats[a]
        moved_c = cents @ g.T
        marg = np.stack([t.margin(moved_c) for t in tets])  # (cells, moved)
        targets = marg.argmax(axis=0)
        if marg[targets, np.arange(n_c)].min() < 1e-9:
            raise NotAnActionError(
                f"element {a} maps some cell centroid off all cells")
        for c in range(n_c):
            # vertex sets must match exactly, not just the centroid
            mv = verts[c] @ g.T
            target = int(targets[c])
            d = np.abs(mv[:, None, :] - verts[target][None, :, :]).max(axis=2)
            if d.min(axis=1).max() > 1e-9 or len(set(d.argmin(axis=1))) != 4:
                raise NotAnActionError(
                    f"element {a} does not map cell {cells[c]} onto a cell")
        perms[a] = targets
        if len(set(perms[a])) != n_c:
            raise NotAnActionError(f"element {a} is not a cell permutation")
    # homomorphism: perm(ab) == perm(a) o perm(b)
    for a in range(n_g):
        for b in range(n_g):
            if not np.array_equal(perms[group.table[a, b]], perms[a][perms[b]]):
                raise NotAnActionError("cell permutations are not a homomorphism")
    seen = set()
    orbits = []
    for c in range(n_c):
        if c in seen:
            continue
        orb = frozenset(int(perms[a, c]) for a in range(n_g))
        orbits.append(orb)
        seen |= orb
    stab = np.array([int(np.sum(perms[:, c] == c)) for c in range(n_c)])
    return GroupAction(group=group, family=family, cells=cells, perms=perms,
                       orbits=orbits, stabilizer_orders=stab)


def stabilizer_of_points(group: FiniteGroup, pts: np.ndarray,
                         tol: float = 1e-9, name: str = "") -> FiniteGroup:
    """Subgroup mapping the finite point set onto itself."""
    pts = np.asarray(pts, dtype=float)
    keep = []
    for m in group.mats:
        moved = pts @ m.T
        d = np.abs(moved[:, None, :] - pts[None, :, :]).max(axis=2)
        if d.min(axis=1).max() <= tol and d.min(axis=0).max() <= tol:
            keep.append(m)
    return FiniteGroup.from_elements(keep, name=name)


def hemisphere_orbit_check(lat: Lattice, sphere_group: FiniteGroup,
                           n_points: int = 32, rng=None, tol: float = 1e-9):
    """For random points p, the orbit under the sphere-reflection group meets
    every half-family cell in exactly one point (as a set of points).

    Returns (ok, worst_counts) where worst_counts maps cell -> count for the
    first failing point, if any.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    tets = [lat.tetra(c) for c in lat.cells("half")]
    pts = rng.normal(size=(n_points, 4))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    for p in pts:
        orbit = p @ np.transpose(group_mats := sphere_group.mats, (0, 2, 1))
        orbit = _dedup_points(orbit, 1e-8)
        for tet_i, tet in enumerate(tets):
            cnt = int(np.count_nonzero(tet.contains(orbit, tol)))
            if cnt != 1:
                return False, {"cell": tet_i, "count": cnt}
    return True, None


def _dedup_points(pts: np.ndarray, tol: float) -> np.ndarray:
    keep = []
    for p in pts:
        if not keep or min(float(np.max(np.abs(p - q))) for q in keep) > tol:
            keep.append(p)
    return np.stack(keep)
