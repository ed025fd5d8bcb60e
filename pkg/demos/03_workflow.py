"""
The refinement workflow
=======================

Check the trajectory on the abstract environment. A counterexample whose
violating voxel is still coarse may be spurious, so that voxel is refined
and the check repeats. A violation at Max-resolution is real.
"""
import voxrefine as vr

for name in vr.BUNDLED:
    sc = vr.bundled_scenario(name)
    direct = vr.run_direct(sc.grid, sc.max_resolution, sc.trajectory, sc.robot)
    rep = vr.run_workflow(sc.grid, sc.trajectory, sc.robot, vr.WorkflowOptions(base_resolution=4))
    verdict = "pass" if rep.passed else f"fail at step {rep.length}"
    print(f"{name:10s} {verdict:16s} refinements {rep.refinements:3d}  "
          f"cell checks {rep.cell_checks:6d} vs {direct.cell_checks:6d} without abstraction")

# %%
# The iteration log shows lengths growing as spurious violations disappear.
sc = vr.bundled_scenario("collision")
rep = vr.run_workflow(sc.grid, sc.trajectory, sc.robot, vr.WorkflowOptions(4))
for rec in rep.log[:8]:
    print(rec.iteration, rec.length, rec.refined)
print("...")
print(rep.counterexample.to_text())

# %%
# Refining every violating voxel at once needs fewer checker runs.
multi = vr.run_workflow(sc.grid, sc.trajectory, sc.robot,
                        vr.WorkflowOptions(4, multi_voxel_refinement=True, cascade_fully_solid=True))
print("iterations:", rep.iterations, "->", multi.iterations, "| same length:", multi.length == rep.length)
