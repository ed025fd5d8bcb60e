"""
Exporting to an SMV model checker
=================================

The refined environment becomes one constant boolean array for the base
voxels plus one per refinement; per-step visit expressions index into
them. A counterexample log from the checker maps back to a voxel.
"""
import re
import shutil

import voxrefine as vr

sc = vr.bundled_scenario("collision")
rep = vr.run_workflow(sc.grid, sc.trajectory, sc.robot, vr.WorkflowOptions(8))
model = vr.export_smv(rep.environment, sc.trajectory, sc.robot)
arrays = re.findall(r"^  vox_\w+ := \[", model, re.M)
print(len(model.splitlines()), "lines,", len(arrays), "arrays")
print("\n".join(model.splitlines()[:12]))

# %%
# The internal counterexample, written the way nuXmv prints a trace.
log = vr.counterexample_to_log(rep.counterexample)
print("\n".join(log.splitlines()[-8:]))
back = vr.parse_counterexample_log(log, sc.trajectory)
print("parsed:", back.length, back.violating_cell, back.pose)

# %%
# With nuXmv on PATH the model can be checked externally.
if shutil.which("nuXmv"):
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".smv", delete=False) as f:
        f.write(model)
    print(vr.run_external_checker(f.name, trajectory=sc.trajectory))
else:
    print("nuXmv not installed; skipping the external run")
