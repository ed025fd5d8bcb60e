import numpy as np
import pytest

from oracles import first_violation
from scenes import random_case
from voxrefine.cegar import WorkflowError, WorkflowOptions, run_direct, run_workflow
from voxrefine.robot import RobotModel, Trajectory
from voxrefine.voxel_grid import Aabb, Box, SceneDescription, VoxelGrid, voxelize

UNIT = Aabb((0, 0, 0), (1, 1, 1))


@pytest.fixture
def slab_case():
    """Thin slab below a robot that skims over it without touching at res 32."""
    g = voxelize(SceneDescription((Box((0, 0, 0.3), (1, 1, 0.31)),), UNIT), 32)
    traj = Trajectory(tuple((0.1 + 0.04 * i, 0.5, 0.37) for i in range(20)))
    return g, traj, RobotModel.single(0.05)


def test_empty_environment():
    rep = run_workflow(VoxelGrid.empty(16), Trajectory(((0.5, 0.5, 0.5),)), RobotModel.single(0.1),
                       WorkflowOptions(2))
    assert rep.passed and rep.iterations == 1 and rep.refinements == 0
    assert rep.to_record()["result"] == "pass"


def test_base_equals_max_is_a_single_direct_check(slab_case):
    g, traj, robot = slab_case
    low = Trajectory(tuple((x, y, 0.33) for x, y, _ in traj.poses))
    for t in (traj, low):
        rep = run_workflow(g, t, robot, WorkflowOptions(32))
        direct = run_direct(g, 32, t, robot)
        assert rep.iterations == 1 and rep.refinements == 0
        assert rep.passed == direct.passed
        assert rep.cell_checks == direct.cell_checks
        assert rep.length == (None if direct.passed else direct.counterexample.length)


def test_slab_graze_passes_after_refinement(slab_case):
    g, traj, robot = slab_case
    assert first_violation(g.occupancy, traj.poses, robot.spheres) is None
    coarse = run_direct(g, 2, traj, robot)
    assert not coarse.passed and coarse.counterexample.length == 1  # spurious
    for base in (2, 4, 8):
        rep = run_workflow(g, traj, robot, WorkflowOptions(base))
        assert rep.passed
        assert rep.refinements >= 1
        assert rep.environment.refinement_count == rep.refinements
    # at 16 the slab cell's top face (0.3125) is already below the sphere
    assert run_workflow(g, traj, robot, WorkflowOptions(16)).refinements == 0


def test_direct_pass_at_max_implies_workflow_pass():
    rng = np.random.default_rng(31)
    n = 0
    while n < 15:
        g, traj, robot = random_case(rng, max_res=16)
        if not run_direct(g, 16, traj, robot).passed:
            continue
        n += 1
        for base in (2, 4, 8, 16):
            assert run_workflow(g, traj, robot, WorkflowOptions(base)).passed


def test_lengths_never_decrease_across_iterations():
    rng = np.random.default_rng(32)
    for _ in range(40):
        g, traj, robot = random_case(rng, max_res=16)
        rep = run_workflow(g, traj, robot, WorkflowOptions(2))
        lengths = [r.length for r in rep.log if r.length is not None]
        assert lengths == sorted(lengths)
        assert sum(len(r.refined) for r in rep.log) == rep.refinements
        assert sum(r.cell_checks for r in rep.log) == rep.cell_checks


@pytest.mark.parametrize("multi, cascade", [(True, False), (False, True), (True, True)])
def test_options_keep_the_outcome(multi, cascade):
    rng = np.random.default_rng(33)
    for _ in range(40):
        g, traj, robot = random_case(rng)
        ref = first_violation(g.occupancy, traj.poses, robot.spheres)
        for base in (2, 4):
            plain = run_workflow(g, traj, robot, WorkflowOptions(base))
            rep = run_workflow(g, traj, robot, WorkflowOptions(base, multi, cascade))
            assert rep.length == plain.length == ref
            if not rep.passed:
                assert rep.counterexample.pose == traj.poses[ref - 1]


def test_multi_voxel_needs_no_more_iterations_on_a_wide_contact():
    g = voxelize(SceneDescription((Box((0, 0, 0), (1, 1, 0.4)),), UNIT), 16)
    traj = Trajectory(((0.5, 0.5, 0.9), (0.5, 0.5, 0.6), (0.5, 0.5, 0.45)))
    robot = RobotModel.single(0.1)
    one = run_workflow(g, traj, robot, WorkflowOptions(2))
    many = run_workflow(g, traj, robot, WorkflowOptions(2, multi_voxel_refinement=True))
    assert one.length == many.length == 3
    assert many.iterations < one.iterations


def test_cascade_skips_fully_solid_voxels():
    g = VoxelGrid(np.ones((16, 16, 16), dtype=bool))
    traj = Trajectory(((0.3, 0.3, 0.3),))
    robot = RobotModel.single(0.01)
    plain = run_workflow(g, traj, robot, WorkflowOptions(2))
    fast = run_workflow(g, traj, robot, WorkflowOptions(2, cascade_fully_solid=True))
    assert plain.length == fast.length == 1
    assert plain.refinements == 3 and fast.refinements == 0 and fast.iterations == 1


def test_cascade_descends_through_all_solid_children():
    occ = np.zeros((16, 16, 16), dtype=bool)
    occ[0:8, 0:8, 0:8] = True
    occ[0, 0, 0] = False  # keeps every ancestor of (16: 0,0,0) from being fully solid
    g = VoxelGrid(occ)
    traj = Trajectory(((0.01, 0.01, 0.01),))
    robot = RobotModel.single(0.001)
    plain = run_workflow(g, traj, robot, WorkflowOptions(2))
    fast = run_workflow(g, traj, robot, WorkflowOptions(2, cascade_fully_solid=True))
    assert plain.passed and fast.passed
    assert fast.refinements == plain.refinements
    assert fast.iterations < plain.iterations


def test_iteration_cap():
    g = voxelize(SceneDescription((Box((0, 0, 0.3), (1, 1, 0.31)),), UNIT), 32)
    traj = Trajectory(((0.5, 0.5, 0.37),))
    with pytest.raises(WorkflowError):
        run_workflow(g, traj, RobotModel.single(0.05), WorkflowOptions(2, max_iterations=2))
