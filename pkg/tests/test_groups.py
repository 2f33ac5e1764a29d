"""Finite symmetry groups: closure, named subgroups, actions, stabilizers."""

import numpy as np
import pytest

from lawsonkit.groups import (ClosureOverflowError, FiniteGroup,
                              NotAnActionError, act, build_named_groups,
                              closure_cap, exchange_element,
                              exchange_extension, hemisphere_orbit_check,
                              stabilizer_of_points)
from lawsonkit.lattice import Lattice


def test_closure_of_one_reflection(lat32):
    r = lat32.sigma_lower(0).reflection()
    g = FiniteGroup.close([r], cap=16)
    assert g.order == 2


def test_closure_cap_overflow(lat32, ng32):
    gens = [g for g in ng32.full.mats[:10]]
    with pytest.raises(ClosureOverflowError):
        FiniteGroup.close(gens, cap=5)


def test_named_orders_32(ng32):
    assert ng32.full.order == 48
    assert ng32.sphere_reflections.order == 24
    assert ng32.circle_half_turns.order == 24
    assert ng32.orientation_preserving.order == 24
    assert ng32.quad_half_turns.order == 12
    assert ng32.axis_half_turns.order == 12


def test_named_orders_33():
    ng = build_named_groups(Lattice(3, 3))
    orders = sorted(g.order for g in ng.all_named())
    assert orders == [18, 18, 36, 36, 36, 72]


def test_elements_orthogonal(ng32):
    for mat in ng32.full.mats:
        assert np.allclose(mat @ mat.T, np.eye(4), atol=1e-12)
    dets = ng32.full.dets()
    assert np.allclose(np.abs(dets), 1.0, atol=1e-12)
    assert int(np.count_nonzero(dets > 0)) == 24


def test_rotation_subgroup_is_circle_half_turns(ng32):
    rot = {i for i, d in enumerate(ng32.full.dets()) if d > 0}
    assert rot == set(ng32.circle_half_turns.subset_indices_in(ng32.full))


def test_subgroup_relations(ng32):
    for g in ng32.all_named():
        assert g.is_subgroup_of(ng32.full)
    assert ng32.quad_half_turns.is_subgroup_of(ng32.circle_half_turns)
    assert ng32.axis_half_turns.is_subgroup_of(ng32.circle_half_turns)
    assert not ng32.full.is_subgroup_of(ng32.sphere_reflections)


def test_intersection(ng32):
    both = ng32.sphere_reflections.intersection(ng32.circle_half_turns)
    # rotations among the sphere-generated elements
    assert both.order == 12
    assert both.is_subgroup_of(ng32.sphere_reflections)


def test_dedup_no_duplicates(ng32):
    mats = ng32.full.mats
    flat = mats.reshape(len(mats), -1)
    d = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=2)
    np.fill_diagonal(d, 1.0)
    assert d.min() > 1e-6


def test_act_simply_transitive(lat32, ng32):
    a = act(ng32.sphere_reflections, lat32, "half")
    assert a.simply_transitive
    assert len(a.orbits) == 1 and len(a.orbits[0]) == 24
    assert set(a.stabilizer_orders.tolist()) == {1}
    b = act(ng32.quad_half_turns, lat32, "even")
    assert b.simply_transitive and len(b.cells) == 12


def test_act_full_group(lat32, ng32):
    a = act(ng32.full, lat32, "even")
    assert a.transitive
    assert set(a.stabilizer_orders.tolist()) == {4}
    b = act(ng32.full, lat32, "half")
    assert b.transitive
    assert set(b.stabilizer_orders.tolist()) == {2}
    # the integer family splits into the two parity classes
    c = act(ng32.full, lat32, "int")
    assert sorted(len(o) for o in c.orbits) == [12, 12]


def test_act_perms_are_permutations(lat32, ng32):
    a = act(ng32.quad_half_turns, lat32, "even")
    n = len(a.cells)
    for perm in a.perms:
        assert sorted(perm.tolist()) == list(range(n))


def test_act_rejects_non_symmetry(lat32):
    swap = np.zeros((4, 4))
    swap[0, 2] = swap[1, 3] = swap[2, 0] = swap[3, 1] = 1.0
    bad = FiniteGroup.from_elements([np.eye(4), swap], name="swap")
    with pytest.raises(NotAnActionError):
        act(bad, lat32, "int")


def test_stabilizer_orders(lat32, ng32):
    tet = lat32.tetra(lat32.cell("int", 0, 0))
    assert stabilizer_of_points(ng32.full, tet.verts).order == 4
    half = lat32.tetra(lat32.cell("half", 0.5, 0.5))
    assert stabilizer_of_points(ng32.full, half.verts).order == 2


def test_exchange_requires_square(lat32):
    with pytest.raises(ValueError):
        exchange_element(lat32)


def test_exchange_extension_33():
    lat = Lattice(3, 3)
    ng = build_named_groups(lat)
    ex = exchange_element(lat)
    assert np.allclose(ex @ lat.t_lower(1), lat.t_upper(1))
    ext = exchange_extension(lat, ng.full)
    assert ext.order == 144
    assert ng.full.is_subgroup_of(ext)
    tet = lat.tetra(lat.cell("int", 0, 0))
    # the cell gains the coordinate swap: dihedral stabilizer of order 8
    assert stabilizer_of_points(ext, tet.verts).order == 8


def test_hemisphere_orbits(lat32, ng32):
    ok, worst = hemisphere_orbit_check(lat32, ng32.sphere_reflections,
                                       n_points=16,
                                       rng=np.random.default_rng(4))
    assert ok, worst


def test_closure_cap_value(lat32):
    assert closure_cap(lat32) >= 8 * 3 * 2


def test_group_json(ng32):
    d = ng32.quad_half_turns.to_json_dict()
    assert d["order"] == 12
