"""Regenerate the bundled scenario files under src/voxrefine/data/.

A pick-and-place table: a floor slab, a flat tray in the middle, a raised
tray on the left and a box on the right. The gripper, modelled as one
sphere, travels across the table and lowers itself over the box.

* collision: the gripper is lowered into the box.
* near_miss: the gripper stops just above the box; the gap is smaller than a
  voxel at resolution 32 but larger than one at resolution 64.
* safe: the gripper stays high above everything.
"""
import json
from pathlib import Path

import numpy as np

from voxrefine import SceneDescription, save_binvox, voxelize

OUT = Path(__file__).resolve().parents[1] / "src" / "voxrefine" / "data"
MAX_RES = 64
BOX_TOP = 0.45
GRIPPER_R = 0.1

SCENE = {
    "primitives": [
        {"kind": "box", "min": [0.0, 0.0, 0.0], "max": [1.0, 1.0, 0.2]},        # table
        {"kind": "box", "min": [0.38, 0.3, 0.2], "max": [0.58, 0.7, 0.23]},     # tray
        {"kind": "box", "min": [0.05, 0.7, 0.2], "max": [0.25, 0.95, 0.32]},    # raised tray
        {"kind": "box", "min": [0.7, 0.4, 0.2], "max": [0.86, 0.6, BOX_TOP]},  # box
    ],
    "domain": {"min": [0.0, 0.0, 0.0], "max": [1.0, 1.0, 1.0]},
}
ROBOT = {"spheres": [{"offset": [0.0, 0.0, 0.0], "radius": GRIPPER_R}]}


def line(a, b, n):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return [tuple(round(float(v), 6) for v in a + (b - a) * t) for t in np.linspace(0, 1, n)]


def poses(kind):
    home = (0.15, 0.5, 0.75)
    above = (0.78, 0.5, 0.75)
    if kind == "safe":
        return line((0.15, 0.5, 0.88), (0.78, 0.5, 0.88), 22) + line((0.78, 0.5, 0.88), (0.15, 0.5, 0.88), 18)[1:]
    if kind == "collision":
        return line(home, above, 22) + line(above, (0.78, 0.5, 0.47), 15)[1:]
    # lowest gripper point 0.46: above the box top at resolution 64
    # (0.453125) but below it at resolution 32 (0.46875)
    low = (0.78, 0.5, 0.46 + GRIPPER_R)
    return line(home, above, 22) + line(above, low, 10)[1:] + line(low, home, 10)[1:]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "table_scene.json").write_text(json.dumps(SCENE, indent=2) + "\n")
    save_binvox(voxelize(SceneDescription.from_dict(SCENE), MAX_RES), OUT / "table.binvox")
    for kind in ("collision", "near_miss", "safe"):
        doc = {"name": kind, "environment": {"binvox": "table.binvox"},
               "robot": ROBOT, "poses": [list(p) for p in poses(kind)]}
        (OUT / f"{kind}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
