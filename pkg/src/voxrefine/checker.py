"""Explicit-path checker for "every voxel visited by the robot is not SOLID".

The behavioural model is a fixed trajectory, so the invariant is checked by
stepping through the poses in order; the first step that visits a SOLID leaf
is the counterexample.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .environment import MultiResEnvironment
from .robot import RobotModel, Trajectory, visited_cells
from .voxel_grid import CellId, Vec3


@dataclass(frozen=True)
class Counterexample:
    """First violation of the invariant.

    ``length`` counts states with the initial pose as 1, so it is also the
    1-based index of the violating step.
    """

    length: int
    pose: Optional[Vec3]
    violating_cell: CellId
    all_violating_cells: tuple[CellId, ...] = ()
    trace: tuple[tuple[int, Vec3], ...] = ()

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("counterexample length must be positive")
        if not self.all_violating_cells:
            object.__setattr__(self, "all_violating_cells", (self.violating_cell,))
        elif self.all_violating_cells[0] != self.violating_cell:
            raise ValueError("violating_cell must be the first of all_violating_cells")

    def to_text(self) -> str:
        lines = [f"Counterexample of length {self.length}"]
        for step, pose in self.trace:
            mark = "  <- violation" if step == self.length else ""
            lines.append(f"  step {step}: pose ({pose[0]:.6g}, {pose[1]:.6g}, {pose[2]:.6g}){mark}")
        lines.append(f"  violating cell: level {self.violating_cell.level} "
                     f"x={self.violating_cell.x} y={self.violating_cell.y} z={self.violating_cell.z}")
        if len(self.all_violating_cells) > 1:
            others = ", ".join(str(c) for c in self.all_violating_cells[1:])
            lines.append(f"  also violating: {others}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict:
        return {
            "length": self.length,
            "pose": list(self.pose) if self.pose is not None else None,
            "violating_cell": list(self.violating_cell),
            "all_violating_cells": [list(c) for c in self.all_violating_cells],
        }


@dataclass(frozen=True)
class CheckOutcome:
    counterexample: Optional[Counterexample]
    cell_checks: int = 0

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def __str__(self) -> str:
        if self.passed:
            return f"PASS ({self.cell_checks} cell checks)"
        return f"FAIL at step {self.counterexample.length} ({self.cell_checks} cell checks)"


@dataclass(frozen=True)
class RefinementProposal:
    cells: tuple[CellId, ...]
    counterexample: Counterexample = field(repr=False)


@dataclass(frozen=True)
class RealCounterexample:
    counterexample: Counterexample


def check_trajectory(env: MultiResEnvironment, trajectory: Trajectory,
                     robot: RobotModel) -> CheckOutcome:
    start = env.cell_checks
    for step, pose in enumerate(trajectory.poses, start=1):
        violating = tuple(c for c, solid in visited_cells(env, pose, robot) if solid)
        if violating:
            trace = tuple((i, p) for i, p in enumerate(trajectory.poses[:step], start=1))
            cex = Counterexample(step, pose, violating[0], violating, trace)
            return CheckOutcome(cex, env.cell_checks - start)
    return CheckOutcome(None, env.cell_checks - start)


def analyze_counterexample(outcome: CheckOutcome, env: MultiResEnvironment, *,
                           multi_voxel: bool = False) -> Union[RefinementProposal, RealCounterexample]:
    """Turn a failed check into a refinement proposal, or declare it real."""
    cex = outcome.counterexample
    if cex is None:
        raise ValueError("cannot analyze a passing check outcome")
    top = env.max_resolution
    if cex.violating_cell.level >= top:
        return RealCounterexample(cex)
    if multi_voxel:
        cells = tuple(c for c in cex.all_violating_cells if c.level < top)
    else:
        cells = (cex.violating_cell,)
    return RefinementProposal(cells, cex)
