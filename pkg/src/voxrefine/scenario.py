"""Scenario documents: environment + trajectory + robot in one JSON file.

::

    {
      "name": "collision",
      "environment": {"binvox": "collision.binvox"},
      "poses": [[0.1, 0.5, 0.6], ...],
      "robot": {"spheres": [{"offset": [0, 0, 0], "radius": 0.06}]}
    }

``environment`` may instead hold ``{"scene": <scene doc or path>,
"resolution": 64}``. Relative paths are resolved against the scenario file.
The Max-resolution of a scenario is the resolution of its grid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .robot import RobotModel, Trajectory
from .voxel_grid import SceneDescription, VoxelGrid, read_binvox, voxelize

BUNDLED = ("collision", "near_miss", "safe")


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: VoxelGrid
    trajectory: Trajectory
    robot: RobotModel
    scene: Optional[SceneDescription] = None

    @property
    def max_resolution(self) -> int:
        return self.grid.resolution

    def grid_at(self, resolution: int) -> VoxelGrid:
        """The environment at a (possibly lower) Max-resolution."""
        if resolution == self.grid.resolution:
            return self.grid
        if self.scene is not None:
            return voxelize(self.scene, resolution)
        return self.grid.downsample(resolution)


def scenario_from_dict(doc: dict, base_dir: Union[str, Path] = ".") -> Scenario:
    base_dir = Path(base_dir)
    env = doc["environment"]
    scene = None
    if "binvox" in env:
        grid = read_binvox(base_dir / env["binvox"])
    elif "scene" in env:
        sdoc = env["scene"]
        if isinstance(sdoc, str):
            sdoc = json.loads((base_dir / sdoc).read_text())
        scene = SceneDescription.from_dict(sdoc)
        grid = voxelize(scene, int(env["resolution"]))
    else:
        raise ValueError("scenario environment needs a 'binvox' or a 'scene' entry")
    return Scenario(doc.get("name", "scenario"), grid, Trajectory(tuple(doc["poses"])),
                    RobotModel.from_dict(doc["robot"]), scene)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario file, or one of the bundled scenarios by name."""
    if str(path) in BUNDLED:
        return bundled_scenario(str(path))
    path = Path(path)
    return scenario_from_dict(json.loads(path.read_text()), path.parent)


def bundled_dir() -> Path:
    return Path(str(resources.files("voxrefine") / "data"))


def bundled_scenario(name: str) -> Scenario:
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled scenario {name!r}; choose from {BUNDLED}")
    return load_scenario(bundled_dir() / f"{name}.json")
