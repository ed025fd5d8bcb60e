"""Trajectories and the sphere-set robot occupancy model."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

from .environment import MultiResEnvironment
from .voxel_grid import CellId, Sphere, Vec3, _vec3


@dataclass(frozen=True)
class Trajectory:
    """Robot positions per step; step 1 is ``poses[0]``."""

    poses: tuple[Vec3, ...]

    def __post_init__(self) -> None:
        poses = tuple(_vec3(p, "pose") for p in self.poses)
        if not poses:
            raise ValueError("a trajectory needs at least one pose")
        object.__setattr__(self, "poses", poses)

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self):
        return iter(self.poses)


@dataclass(frozen=True)
class RobotModel:
    """Spheres ``(offset, radius)`` rigidly attached to the pose point."""

    spheres: tuple[tuple[Vec3, float], ...]

    def __post_init__(self) -> None:
        spheres = tuple((_vec3(off, "offset"), float(r)) for off, r in self.spheres)
        if not spheres:
            raise ValueError("a robot model needs at least one sphere")
        if any(not r > 0 for _, r in spheres):
            raise ValueError("robot sphere radii must be positive")
        object.__setattr__(self, "spheres", spheres)

    @classmethod
    def single(cls, radius: float) -> "RobotModel":
        return cls((((0.0, 0.0, 0.0), radius),))

    @classmethod
    def from_dict(cls, doc: dict) -> "RobotModel":
        return cls(tuple((s.get("offset", (0.0, 0.0, 0.0)), s["radius"]) for s in doc["spheres"]))

    def to_dict(self) -> dict:
        return {"spheres": [{"offset": list(o), "radius": r} for o, r in self.spheres]}


def occupied_region(pose: Sequence[float], robot: RobotModel) -> list[Sphere]:
    p = _vec3(pose, "pose")
    return [Sphere(tuple(a + b for a, b in zip(p, off)), r) for off, r in robot.spheres]


def visited_cells(env: MultiResEnvironment, pose: Sequence[float],
                  robot: RobotModel) -> list[tuple[CellId, bool]]:
    """Leaves touched by any robot sphere at ``pose``, deduplicated and sorted."""
    t, s = env.translate, env.scale
    if not all(t[a] <= pose[a] <= t[a] + s for a in range(3)):
        warnings.warn(f"pose {tuple(pose)} lies outside the environment cube", stacklevel=2)
    spheres = occupied_region(pose, robot)
    if len(spheres) == 1:
        return env.leaves_touching_sphere(spheres[0].center, spheres[0].radius)
    seen: dict[CellId, bool] = {}
    for sp in spheres:
        seen.update(env.leaves_touching_sphere(sp.center, sp.radius))
    return sorted(seen.items())
