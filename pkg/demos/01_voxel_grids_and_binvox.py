"""
Voxel grids, scenes and binvox files
====================================

A scene of boxes and spheres is voxelized conservatively: a voxel is SOLID
when its closed box touches any primitive. Grids read and write the binvox
format.
"""
import tempfile
from pathlib import Path

import numpy as np

import voxrefine as vr

# %%
# A table top with a ball resting on it.
scene = vr.SceneDescription(
    (vr.Box((0.0, 0.0, 0.0), (1.0, 1.0, 0.25)), vr.Sphere((0.6, 0.5, 0.4), 0.15)),
    vr.Aabb((0, 0, 0), (1, 1, 1)),
)
grid = vr.voxelize(scene, 32)
print(grid)
print("solid fraction:", grid.occupancy.mean().round(3))

# %%
# Coarser grids are the block-wise OR of finer ones.
for res in (16, 8, 4, 2):
    print(res, int(grid.downsample(res).occupancy.sum()), "solid of", res ** 3)

# %%
# Round trip through a binvox file.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "table.binvox"
    vr.save_binvox(grid, path)
    print(path.stat().st_size, "bytes on disk")
    assert vr.read_binvox(path) == grid

# %%
# Cells are addressed by (level, x, y, z); children split each axis in two.
cell = vr.CellId(4, 0, 1, 0)
print(vr.children(cell)[:2], "...")
xs, ys, zs = vr.descendant_ranges(cell, 128)
print("descendants at 128:", (xs.start, xs.stop - 1), (ys.start, ys.stop - 1), (zs.start, zs.stop - 1))
print(np.round(vr.cell_aabb(cell).min, 3), np.round(vr.cell_aabb(cell).max, 3))
