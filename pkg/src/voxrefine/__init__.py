"""Collision verification of robot trajectories against voxel environments,
using OR-abstraction of the voxel grid and counterexample-driven selective
refinement of individual voxels."""
from .cegar import WorkflowError, WorkflowOptions, WorkflowReport, run_direct, run_workflow
from .checker import (
    CheckOutcome,
    Counterexample,
    RealCounterexample,
    RefinementProposal,
    analyze_counterexample,
    check_trajectory,
)
from .environment import (
    ChildBlock,
    MultiResEnvironment,
    fully_solid_at_max,
    initial_abstraction,
    leaf_at,
    refine,
    refinement_bound,
    solid_leaves_intersecting,
)
from .robot import RobotModel, Trajectory, occupied_region, visited_cells
from .scenario import BUNDLED, Scenario, bundled_scenario, load_scenario
from .smv_export import counterexample_to_log, export_smv, parse_counterexample_log, run_external_checker
from .voxel_grid import (
    Aabb,
    Box,
    CellId,
    SceneDescription,
    Sphere,
    VoxelGrid,
    cell_aabb,
    children,
    descendant_ranges,
    parent,
    parse_binvox,
    read_binvox,
    save_binvox,
    voxelize,
    write_binvox,
)

__version__ = "0.1.0"
