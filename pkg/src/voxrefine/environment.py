"""Multi-resolution abstract environment with sparse selective refinements.

The environment keeps the Max-resolution grid untouched and layers an
abstraction on top of it: a Base-resolution occupancy array plus one
:class:`ChildBlock` per refined cell. A cell is a *leaf* unless it has been
refined. Every leaf is SOLID iff at least one of its Max-resolution
descendants is SOLID, which makes the abstraction an over-approximation for
the "robot never visits a SOLID voxel" property.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .voxel_grid import (
    Aabb,
    CellId,
    VoxelGrid,
    cell_aabb,
    children,
    descendant_slices,
    is_power_of_two,
    sphere_aabb_intersects,
)

# A box test receives ``(mins, maxs)`` arrays shaped (n, 3) and returns a bool mask.
BoxTest = Callable[[np.ndarray, np.ndarray], np.ndarray]


class RefinementError(ValueError):
    pass


@dataclass(frozen=True)
class ChildBlock:
    """Solidity of the 8 children of a refined cell, in ``(dz, dy, dx)`` order."""

    values: tuple[bool, ...]

    def __post_init__(self) -> None:
        vals = tuple(bool(v) for v in self.values)
        if len(vals) != 8:
            raise ValueError(f"a child block holds exactly 8 values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, i: int) -> bool:
        return self.values[i]

    @property
    def all_solid(self) -> bool:
        return all(self.values)


class MultiResEnvironment:
    """Abstract environment: Base-resolution grid plus sparse refinements.

    Instances are treated as immutable values; :func:`refine` returns a new
    environment. The only mutable state is ``cell_checks``, a work counter
    bumped by every leaf query.
    """

    def __init__(self, max_grid: VoxelGrid, base_resolution: int, base_occupancy: np.ndarray,
                 refinements: Optional[dict[CellId, ChildBlock]] = None):
        self.max_grid = max_grid
        self.base_resolution = int(base_resolution)
        occ = np.asarray(base_occupancy, dtype=bool)
        occ.flags.writeable = False
        self.base_occupancy = occ
        self._refinements: dict[CellId, ChildBlock] = dict(refinements or {})
        self.cell_checks = 0

    # -- basic properties ---------------------------------------------------
    @property
    def max_resolution(self) -> int:
        return self.max_grid.resolution

    @property
    def translate(self) -> tuple[float, float, float]:
        return self.max_grid.translate

    @property
    def scale(self) -> float:
        return self.max_grid.scale

    @property
    def refinements(self) -> dict[CellId, ChildBlock]:
        """Read-only view (a copy) of the refinement map."""
        return dict(self._refinements)

    @property
    def refinement_count(self) -> int:
        return len(self._refinements)

    def __repr__(self) -> str:
        return (f"MultiResEnvironment(base={self.base_resolution}, max={self.max_resolution}, "
                f"refinements={len(self._refinements)})")

    def child_block(self, cell: CellId) -> ChildBlock:
        return self._refinements[cell]

    def is_refined(self, cell: CellId) -> bool:
        return cell in self._refinements

    def is_leaf(self, cell: CellId) -> bool:
        """True if ``cell`` is a current leaf (exists and is not refined)."""
        if cell.level < self.base_resolution or cell.level > self.max_resolution:
            return False
        if cell in self._refinements:
            return False
        if cell.level == self.base_resolution:
            return True
        return CellId(cell.level // 2, cell.x // 2, cell.y // 2, cell.z // 2) in self._refinements

    def solid(self, cell: CellId) -> bool:
        """Stored solidity of a current leaf (or refined cell)."""
        if cell.level == self.base_resolution:
            return bool(self.base_occupancy[cell.x, cell.y, cell.z])
        par = CellId(cell.level // 2, cell.x // 2, cell.y // 2, cell.z // 2)
        block = self._refinements.get(par)
        if block is None:
            raise KeyError(f"{cell} is not part of the current abstraction")
        return block[(cell.x & 1) | ((cell.y & 1) << 1) | ((cell.z & 1) << 2)]

    def aabb(self, cell: CellId) -> Aabb:
        return cell_aabb(cell, self.translate, self.scale)

    def leaves(self) -> Iterator[tuple[CellId, bool]]:
        """All leaves with their solidity, in ``(level, x, y, z)`` order."""
        out = []
        stack = [CellId(self.base_resolution, *map(int, ix))
                 for ix in np.ndindex(*(self.base_resolution,) * 3)]
        while stack:
            cell = stack.pop()
            if cell in self._refinements:
                stack.extend(children(cell))
            else:
                out.append((cell, self.solid(cell)))
        out.sort()
        return iter(out)

    # -- queries ------------------------------------------------------------
    def _query(self, lo: Sequence[float], hi: Sequence[float], test: BoxTest) -> list[tuple[CellId, bool]]:
        """Leaves whose closed box passes ``test``; candidates bounded by ``[lo, hi]``."""
        L = self.base_resolution
        edge = self.scale / L
        t = self.translate
        win = []
        for a in range(3):
            i0 = max(math.floor((lo[a] - t[a]) / edge) - 1, 0)
            i1 = min(math.floor((hi[a] - t[a]) / edge) + 1, L - 1)
            if i0 > i1:
                return []
            win.append(np.arange(i0, i1 + 1))
        idx = np.stack(np.meshgrid(*win, indexing="ij"), axis=-1).reshape(-1, 3)
        tv = np.asarray(t)
        hit = test(tv + idx * edge, tv + (idx + 1) * edge)
        idx = idx[hit]
        solid = self.base_occupancy[idx[:, 0], idx[:, 1], idx[:, 2]]
        found: list[tuple[CellId, bool]] = []
        refs = self._refinements
        if not refs:
            found = [(CellId(L, x, y, z), s) for (x, y, z), s in zip(idx.tolist(), solid.tolist())]
        else:
            pending = []
            for (x, y, z), s in zip(idx.tolist(), solid.tolist()):
                c = CellId(L, x, y, z)
                if c in refs:
                    pending.append(c)
                else:
                    found.append((c, s))
            while pending:
                cell = pending.pop()
                block = refs[cell]
                kids = children(cell)
                k = np.array([(c.x, c.y, c.z) for c in kids])
                ke = self.scale / (2 * cell.level)
                mask = test(tv + k * ke, tv + (k + 1) * ke)
                for i in np.flatnonzero(mask).tolist():
                    if kids[i] in refs:
                        pending.append(kids[i])
                    else:
                        found.append((kids[i], block[i]))
        found.sort()
        self.cell_checks += len(found)
        return found

    def solid_leaves_intersecting(self, region: Aabb) -> list[tuple[CellId, bool]]:
        """Leaves whose closed box meets ``region``, sorted, with solidity."""
        rmin, rmax = np.asarray(region.min), np.asarray(region.max)

        def test(mins, maxs):
            return np.all((mins <= rmax) & (maxs >= rmin), axis=-1)

        return self._query(region.min, region.max, test)

    def leaves_touching_sphere(self, center: Sequence[float], radius: float) -> list[tuple[CellId, bool]]:
        """Leaves whose closed box meets the closed ball, sorted, with solidity."""
        c = tuple(float(v) for v in center)
        lo = tuple(v - radius for v in c)
        hi = tuple(v + radius for v in c)
        return self._query(lo, hi, lambda mins, maxs: sphere_aabb_intersects(c, radius, mins, maxs))

    def leaf_at(self, point: Sequence[float]) -> CellId:
        """Leaf whose half-open box holds ``point``; the cube's upper faces
        belong to the last cell along each axis."""
        t, s = self.translate, self.scale
        p = [float(v) for v in point]
        if not all(t[a] <= p[a] <= t[a] + s for a in range(3)):
            raise ValueError(f"point {tuple(p)} lies outside the grid cube")

        def index(level: int) -> CellId:
            ix = [min(int(math.floor((p[a] - t[a]) / (s / level))), level - 1) for a in range(3)]
            return CellId(level, *ix)

        cell = index(self.base_resolution)
        while cell in self._refinements:
            cell = index(cell.level * 2)
        return cell

    def fully_solid_at_max(self, cell: CellId) -> bool:
        return bool(self.max_grid.occupancy[descendant_slices(cell, self.max_resolution)].all())

    def or_at_max(self, cell: CellId) -> bool:
        return bool(self.max_grid.occupancy[descendant_slices(cell, self.max_resolution)].any())

    # -- exports --------------------------------------------------------------
    def leaf_table(self) -> str:
        """Line-oriented leaf listing: ``level x y z solid volume``."""
        lines = ["# level x y z solid volume"]
        for cell, s in self.leaves():
            lines.append(f"{cell.level} {cell.x} {cell.y} {cell.z} {int(s)} {(1.0 / cell.level) ** 3!r}")
        return "\n".join(lines) + "\n"

    def render(self, resolution: Optional[int] = None) -> VoxelGrid:
        """Paint leaf solidity into a dense grid (default: Max-resolution).

        Coarser target resolutions are OR-reductions of the painted grid.
        """
        m = self.max_resolution
        occ = np.zeros((m,) * 3, dtype=bool)
        k = m // self.base_resolution
        occ[:] = np.repeat(np.repeat(np.repeat(self.base_occupancy, k, 0), k, 1), k, 2)
        for cell in sorted(self._refinements):
            block = self._refinements[cell]
            for i, child in enumerate(children(cell)):
                occ[descendant_slices(child, m)] = block[i]
        grid = VoxelGrid(occ, self.translate, self.scale)
        if resolution is None or resolution == m:
            return grid
        if resolution < self.base_resolution:
            raise ValueError("render resolution below Base-resolution")
        return grid.downsample(resolution)


def initial_abstraction(max_grid: VoxelGrid, base_resolution: int) -> MultiResEnvironment:
    if not is_power_of_two(base_resolution) or base_resolution < 2:
        raise ValueError(f"base resolution must be a power of two >= 2, got {base_resolution!r}")
    if base_resolution > max_grid.resolution:
        raise ValueError(f"base resolution {base_resolution} exceeds max resolution "
                         f"{max_grid.resolution}")
    return MultiResEnvironment(max_grid, base_resolution,
                               max_grid.downsample(base_resolution).occupancy)


def refine(env: MultiResEnvironment, cell: CellId) -> MultiResEnvironment:
    """Split leaf ``cell`` into 8 children valued from the Max-resolution grid."""
    if cell.level >= env.max_resolution:
        raise RefinementError(f"{cell} already has Max-resolution; no further refinement possible")
    if env.is_refined(cell):
        raise RefinementError(f"{cell} is already refined")
    if not env.is_leaf(cell):
        raise RefinementError(f"{cell} is not a leaf of the current abstraction")
    block = ChildBlock(tuple(env.or_at_max(c) for c in children(cell)))
    refs = env.refinements
    refs[cell] = block
    return MultiResEnvironment(env.max_grid, env.base_resolution, env.base_occupancy, refs)


def refinement_bound(base_resolution: int, max_resolution: int) -> int:
    """Number of distinct cells that could ever be refined."""
    total, lvl = 0, base_resolution
    while lvl < max_resolution:
        total += lvl ** 3
        lvl *= 2
    return total


# free-function aliases mirroring the method names
def leaf_at(env: MultiResEnvironment, point: Sequence[float]) -> CellId:
    return env.leaf_at(point)


def solid_leaves_intersecting(env: MultiResEnvironment, region: Aabb) -> list[tuple[CellId, bool]]:
    return env.solid_leaves_intersecting(region)


def fully_solid_at_max(env: MultiResEnvironment, cell: CellId) -> bool:
    return env.fully_solid_at_max(cell)
