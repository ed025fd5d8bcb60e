"""Verification workflow with selective refinement of the voxel abstraction.

Starting from an OR-abstraction of the Max-resolution grid at the chosen
Base-resolution, the loop checks the trajectory, and on a violation refines
the offending voxel into its eight children. A violation only counts as real
once the offending voxel has Max-resolution. Unlike classical CEGAR, the
counterexample is never replayed on the concrete model.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .checker import (
    CheckOutcome,
    Counterexample,
    RealCounterexample,
    analyze_counterexample,
    check_trajectory,
)
from .environment import MultiResEnvironment, initial_abstraction, refine, refinement_bound
from .robot import RobotModel, Trajectory, occupied_region
from .voxel_grid import CellId, VoxelGrid, children, sphere_aabb_intersects

log = logging.getLogger(__name__)


class WorkflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class WorkflowOptions:
    base_resolution: int = 4
    multi_voxel_refinement: bool = False
    cascade_fully_solid: bool = False
    # None: refinement bound + trajectory length
    max_iterations: Optional[int] = None


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    length: Optional[int]  # None when the check passed
    refined: tuple[CellId, ...]
    cell_checks: int

    def to_record(self) -> dict:
        return {"iteration": self.iteration, "length": self.length,
                "refined": [list(c) for c in self.refined], "cell_checks": self.cell_checks}


@dataclass
class WorkflowReport:
    counterexample: Optional[Counterexample]
    iterations: int
    refinements: int
    cell_checks: int
    wall_time: float
    base_resolution: int
    max_resolution: int
    log: list[IterationRecord] = field(default_factory=list)
    environment: Optional[MultiResEnvironment] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    @property
    def length(self) -> Optional[int]:
        return None if self.counterexample is None else self.counterexample.length

    def to_record(self) -> dict:
        return {
            "result": "pass" if self.passed else "fail",
            "base_resolution": self.base_resolution,
            "max_resolution": self.max_resolution,
            "length": self.length,
            "iterations": self.iterations,
            "refinements": self.refinements,
            "cell_checks": self.cell_checks,
            "wall_time": self.wall_time,
            "counterexample": None if self.passed else self.counterexample.to_record(),
            "log": [r.to_record() for r in self.log],
        }


def run_direct(max_grid: VoxelGrid, resolution: int, trajectory: Trajectory,
               robot: RobotModel) -> CheckOutcome:
    """One check against the plain abstraction at ``resolution``, no refinement."""
    return check_trajectory(initial_abstraction(max_grid, resolution), trajectory, robot)


def _touched_children(cell: CellId, env: MultiResEnvironment, pose, robot: RobotModel) -> list[CellId]:
    kids = children(cell)
    t = np.asarray(env.translate)
    edge = env.scale / kids[0].level
    idx = np.array([(c.x, c.y, c.z) for c in kids])
    mins, maxs = t + idx * edge, t + (idx + 1) * edge
    mask = np.zeros(8, dtype=bool)
    for sp in occupied_region(pose, robot):
        mask |= sphere_aabb_intersects(sp.center, sp.radius, mins, maxs)
    return [kids[i] for i in np.flatnonzero(mask)]


def _cascade(env: MultiResEnvironment, cell: CellId, pose, robot: RobotModel,
             refined: list[CellId]) -> MultiResEnvironment:
    """Keep descending while a fresh refinement yields only SOLID children."""
    while env.child_block(cell).all_solid and 2 * cell.level < env.max_resolution:
        touched = _touched_children(cell, env, pose, robot)
        if not touched:
            break
        nxt = touched[0]
        if env.fully_solid_at_max(nxt):
            break
        env = refine(env, nxt)
        refined.append(nxt)
        cell = nxt
    return env


def run_workflow(max_grid: VoxelGrid, trajectory: Trajectory, robot: RobotModel,
                 options: WorkflowOptions = WorkflowOptions()) -> WorkflowReport:
    t0 = time.perf_counter()
    env = initial_abstraction(max_grid, options.base_resolution)
    cap = options.max_iterations
    if cap is None:
        cap = refinement_bound(options.base_resolution, max_grid.resolution) + len(trajectory)
    records: list[IterationRecord] = []
    n_refined = 0
    checks = 0

    def report(cex: Optional[Counterexample], iterations: int) -> WorkflowReport:
        return WorkflowReport(cex, iterations, n_refined, checks, time.perf_counter() - t0,
                              options.base_resolution, max_grid.resolution, records, env)

    for it in range(1, cap + 1):
        outcome = check_trajectory(env, trajectory, robot)
        checks += outcome.cell_checks
        cex = outcome.counterexample
        if cex is None:
            records.append(IterationRecord(it, None, (), outcome.cell_checks))
            log.debug("iteration %d: pass", it)
            return report(None, it)
        if options.cascade_fully_solid and env.fully_solid_at_max(cex.violating_cell):
            records.append(IterationRecord(it, cex.length, (), outcome.cell_checks))
            log.debug("iteration %d: %s is solid down to Max-resolution", it, cex.violating_cell)
            return report(cex, it)
        analysis = analyze_counterexample(outcome, env, multi_voxel=options.multi_voxel_refinement)
        if isinstance(analysis, RealCounterexample):
            records.append(IterationRecord(it, cex.length, (), outcome.cell_checks))
            log.debug("iteration %d: real counterexample at step %d", it, cex.length)
            return report(cex, it)
        refined: list[CellId] = []
        for cell in analysis.cells:
            env = refine(env, cell)
            refined.append(cell)
            if options.cascade_fully_solid:
                env = _cascade(env, cell, cex.pose, robot, refined)
        n_refined += len(refined)
        records.append(IterationRecord(it, cex.length, tuple(refined), outcome.cell_checks))
        log.debug("iteration %d: step %d, refined %s", it, cex.length, refined)
    raise WorkflowError(f"workflow exceeded {cap} iterations")
