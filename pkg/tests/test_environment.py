import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import and_over_block, enumerate_leaves, leaf_box, or_over_block
from voxrefine.environment import (
    ChildBlock,
    RefinementError,
    fully_solid_at_max,
    initial_abstraction,
    leaf_at,
    refine,
    refinement_bound,
    solid_leaves_intersecting,
)
from voxrefine.voxel_grid import Aabb, CellId, VoxelGrid, children


def grid(occ):
    return VoxelGrid(np.asarray(occ, dtype=bool))


def random_occ(rng, res, p):
    return rng.random((res,) * 3) < p


def test_all_false_abstraction():
    env = initial_abstraction(VoxelGrid.empty(16), 4)
    assert not env.base_occupancy.any()
    assert env.refinements == {}


def test_one_solid_voxel_makes_the_abstract_voxel_solid():
    occ = np.zeros((4, 4, 4), dtype=bool)
    occ[3, 0, 0] = True  # one of eight constituents of base cell (1, 0, 0)
    env = initial_abstraction(grid(occ), 2)
    assert env.base_occupancy[1, 0, 0]
    assert env.base_occupancy.sum() == 1


def test_random_8_to_2_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(10):
        occ = random_occ(rng, 8, 0.02)
        env = initial_abstraction(grid(occ), 2)
        for x, y, z in itertools.product(range(2), repeat=3):
            assert env.base_occupancy[x, y, z] == or_over_block(occ, 2, x, y, z)


def test_initial_abstraction_rejects_bad_resolutions():
    with pytest.raises(ValueError):
        initial_abstraction(VoxelGrid.empty(4), 8)
    with pytest.raises(ValueError):
        initial_abstraction(VoxelGrid.empty(8), 3)


def test_refine_empty_leaf():
    env = refine(initial_abstraction(VoxelGrid.empty(8), 2), CellId(2, 1, 0, 1))
    assert env.child_block(CellId(2, 1, 0, 1)) == ChildBlock((False,) * 8)


def test_refine_low_x_half_solid():
    occ = np.zeros((8, 8, 8), dtype=bool)
    occ[0:2, 0:4, 0:4] = True  # low-x half of base cell (2: 0,0,0)
    occ[1, 0, 0] = False
    env = initial_abstraction(grid(occ), 2)
    cell = CellId(2, 0, 0, 0)
    env2 = refine(env, cell)
    block = env2.child_block(cell)
    for i, k in enumerate(children(cell)):
        assert block[i] == or_over_block(occ, 4, k.x, k.y, k.z)
        assert block[i] == (k.x == 0)


def test_refine_is_persistent():
    env = initial_abstraction(VoxelGrid.empty(8), 2)
    env2 = refine(env, CellId(2, 0, 0, 0))
    assert env.refinements == {}
    assert env2.refinement_count == 1


def test_refine_errors():
    env = initial_abstraction(VoxelGrid.empty(4), 2)
    env = refine(env, CellId(2, 0, 0, 0))
    with pytest.raises(RefinementError, match="already refined"):
        refine(env, CellId(2, 0, 0, 0))
    with pytest.raises(RefinementError, match="Max-resolution"):
        refine(env, CellId(4, 0, 0, 0))
    with pytest.raises(RefinementError, match="not a leaf"):
        refine(initial_abstraction(VoxelGrid.empty(8), 2), CellId(4, 0, 0, 0))


def test_refinement_bound():
    assert refinement_bound(2, 2) == 0
    assert refinement_bound(2, 8) == 8 + 64
    assert refinement_bound(4, 128) == sum(L ** 3 for L in (4, 8, 16, 32, 64))


def _random_refinements(env, rng, n):
    for _ in range(n):
        cands = [c for c, _ in env.leaves() if c.level < env.max_resolution]
        if not cands:
            break
        env = refine(env, cands[rng.integers(len(cands))])
    return env


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4]), st.integers(0, 12))
def test_leaves_tile_and_over_approximate(seed, base, n):
    rng = np.random.default_rng(seed)
    occ = random_occ(rng, 16, 0.03)
    env = _random_refinements(initial_abstraction(grid(occ), base), rng, n)
    leaves = list(env.leaves())
    assert [c for c, _ in leaves] == enumerate_leaves(base, set(env.refinements))
    assert sum((1 / c.level) ** 3 for c, _ in leaves) == pytest.approx(1.0)
    for c, solid in leaves:
        assert solid == or_over_block(occ, c.level, c.x, c.y, c.z)


def test_leaf_at_center_uses_half_open_boxes():
    env = initial_abstraction(VoxelGrid.empty(8), 2)
    assert leaf_at(env, (0.5, 0.5, 0.5)) == CellId(2, 1, 1, 1)
    assert leaf_at(env, (1.0, 1.0, 1.0)) == CellId(2, 1, 1, 1)
    assert leaf_at(env, (0.0, 0.0, 0.0)) == CellId(2, 0, 0, 0)
    env = refine(env, CellId(2, 1, 1, 1))
    assert leaf_at(env, (0.5, 0.5, 0.5)) == CellId(4, 2, 2, 2)
    with pytest.raises(ValueError):
        leaf_at(env, (1.01, 0.5, 0.5))


def test_leaf_at_total_over_samples():
    rng = np.random.default_rng(2)
    env = _random_refinements(initial_abstraction(VoxelGrid.empty(16), 2), rng, 10)
    hits = {}
    for p in rng.random((3000, 3)):
        c = leaf_at(env, p)
        assert env.is_leaf(c)
        lo, hi = leaf_box(c)
        assert np.all(lo <= p) and np.all(p < hi)
        hits[c] = hits.get(c, 0) + 1
    # every sample lands in exactly one leaf by construction; boxes are disjoint
    assert set(hits) <= {c for c, _ in env.leaves()}


def test_whole_cube_query():
    env = initial_abstraction(VoxelGrid.empty(8), 2)
    got = solid_leaves_intersecting(env, Aabb((0, 0, 0), (1, 1, 1)))
    assert [c for c, _ in got] == sorted(CellId(2, *i) for i in itertools.product((0, 1), repeat=3))
    assert env.cell_checks == 8


def test_face_plane_query():
    env = refine(initial_abstraction(VoxelGrid.empty(8), 2), CellId(2, 0, 0, 0))
    got = [c for c, _ in env.solid_leaves_intersecting(Aabb((0, 0, 0), (0, 1, 1)))]
    assert got == sorted([CellId(2, 0, 0, 1), CellId(2, 0, 1, 0), CellId(2, 0, 1, 1)]
                         + [CellId(4, 0, y, z) for y in (0, 1) for z in (0, 1)])


def test_region_query_matches_brute_force():
    rng = np.random.default_rng(9)
    occ = random_occ(rng, 16, 0.1)
    env = _random_refinements(initial_abstraction(grid(occ), 2), rng, 25)
    leaves = list(env.leaves())
    for _ in range(50):
        lo = rng.uniform(-0.2, 1.0, 3)
        hi = lo + rng.uniform(0, 0.5, 3)
        got = env.solid_leaves_intersecting(Aabb(tuple(lo), tuple(hi)))
        want = []
        for c, s in leaves:
            clo, chi = leaf_box(c)
            if np.all(clo <= hi) and np.all(lo <= chi):
                want.append((c, s))
        assert got == want


def test_fully_solid_at_max():
    env = initial_abstraction(VoxelGrid(np.ones((8, 8, 8), dtype=bool)), 2)
    assert all(fully_solid_at_max(env, CellId(L, *i)) for L in (2, 4)
               for i in itertools.product(range(L), repeat=3))
    occ = np.ones((8, 8, 8), dtype=bool)
    occ[7, 7, 7] = False
    env = initial_abstraction(grid(occ), 2)
    assert not fully_solid_at_max(env, CellId(2, 1, 1, 1))
    assert fully_solid_at_max(env, CellId(2, 0, 1, 1))


def test_fully_solid_random_matches_brute_force():
    rng = np.random.default_rng(4)
    occ = random_occ(rng, 8, 0.9)
    env = initial_abstraction(grid(occ), 2)
    for L in (2, 4, 8):
        for i in itertools.product(range(L), repeat=3):
            assert fully_solid_at_max(env, CellId(L, *i)) == and_over_block(occ, L, *i)


def test_leaf_table_and_render():
    rng = np.random.default_rng(8)
    occ = random_occ(rng, 8, 0.05)
    env = _random_refinements(initial_abstraction(grid(occ), 2), rng, 5)
    rows = [line.split() for line in env.leaf_table().splitlines()[1:]]
    assert sum(float(r[5]) for r in rows) == pytest.approx(1.0)
    assert [CellId(*map(int, r[:4])) for r in rows] == [c for c, _ in env.leaves()]
    painted = env.render()
    assert np.all(painted.occupancy >= occ)  # over-approximation
    base = initial_abstraction(grid(occ), 2)
    assert base.render(2) == VoxelGrid(base.base_occupancy)
