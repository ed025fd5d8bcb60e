"""
Structural abstraction and selective refinement
===============================================

The environment starts at a coarse Base-resolution where every voxel is the
OR of the Max-resolution voxels it covers. Refining a voxel replaces it by
its eight children, each again an OR over the fine grid.
"""
import voxrefine as vr

grid = vr.bundled_scenario("collision").grid
env = vr.initial_abstraction(grid, 4)
print("max", env.max_resolution, "base", env.base_resolution)
print("solid base voxels:", int(env.base_occupancy.sum()), "of", 4 ** 3)

# %%
# Refine the first solid leaf twice over. The original environment is untouched.
cell = next(c for c, solid in env.leaves() if solid)
env2 = vr.refine(env, cell)
print(cell, "->", env2.child_block(cell))
kid = next(k for k in vr.children(cell) if env2.solid(k))
env3 = vr.refine(env2, kid)
print("refinements:", env.refinement_count, env2.refinement_count, env3.refinement_count)

# %%
# Painting the leaves back at Max-resolution always covers the real obstacle.
painted = env3.render()
print("covers the fine grid:", bool((painted.occupancy >= grid.occupancy).all()))
print("extra solid voxels:", int(painted.occupancy.sum() - grid.occupancy.sum()))

# %%
# The leaf table lists every leaf with its volume.
print("\n".join(env3.leaf_table().splitlines()[:6]))
print("worst case number of refinements:", vr.refinement_bound(4, 64))
