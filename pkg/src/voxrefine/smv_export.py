"""SMV model generation and counterexample-log parsing for an external checker.

Model layout
------------
``step`` (``1..n``) is the only state variable; it starts at 1, increments
deterministically and stays at ``n``. Voxel values are constant boolean
array DEFINEs:

* ``vox_base`` holds every Base-resolution cell, index ``x*B*B + z*B + y``;
* ``vox_<level>_<x>_<y>_<z>`` holds the child block of one refined cell,
  index ``dz*4 + dy*2 + dx``.

The index structure ``visit_<i>`` lists, for step ``i``, the array entries
of every leaf the robot touches. ``vlevel``/``vx``/``vy``/``vz`` name the
first SOLID visited leaf of the current step (``vlevel = 0`` when none),
which lets a counterexample trace be mapped back to a voxel. The checked
property is ``INVARSPEC alpha``.
"""
from __future__ import annotations

import re
import shutil
import subprocess
from pathlib import Path
from typing import Optional, Union

from .checker import Counterexample
from .environment import MultiResEnvironment
from .robot import RobotModel, Trajectory, visited_cells
from .voxel_grid import CellId, child_index, parent

STEP_VAR = "step"
INDEX_VARS = ("vlevel", "vx", "vy", "vz")


def array_ref(env: MultiResEnvironment, cell: CellId) -> str:
    """SMV expression reading the stored value of leaf ``cell``."""
    b = env.base_resolution
    if cell.level == b:
        return f"vox_base[{cell.x * b * b + cell.z * b + cell.y}]"
    p = parent(cell)
    return f"vox_{p.level}_{p.x}_{p.y}_{p.z}[{child_index(cell)}]"


def _bools(values) -> str:
    return "[" + ", ".join("TRUE" if v else "FALSE" for v in values) + "]"


def _case(arms: list[tuple[str, str]], default: str, indent: str = "    ") -> str:
    body = "".join(f"{indent}  {cond} : {val};\n" for cond, val in arms)
    return f"case\n{body}{indent}  TRUE : {default};\n{indent}esac"


def export_smv(env: MultiResEnvironment, trajectory: Trajectory, robot: RobotModel) -> str:
    n = len(trajectory)
    if n < 1:
        raise ValueError("cannot export an empty trajectory")
    b = env.base_resolution
    base_flat = env.base_occupancy.transpose(0, 2, 1).reshape(-1)
    refs = env.refinements
    # the index structure does not count towards the checker's work metric
    saved = env.cell_checks
    visits = [visited_cells(env, pose, robot) for pose in trajectory.poses]
    env.cell_checks = saved

    out = [f"-- voxrefine model: base {b}, max {env.max_resolution}, "
           f"{len(refs)} refinements, {n} steps",
           "MODULE main",
           "VAR",
           f"  {STEP_VAR} : 1..{n};",
           "ASSIGN",
           f"  init({STEP_VAR}) := 1;",
           f"  next({STEP_VAR}) := case",
           f"    {STEP_VAR} < {n} : {STEP_VAR} + 1;",
           f"    TRUE : {STEP_VAR};",
           "  esac;",
           "DEFINE",
           "  -- voxel arrays",
           f"  vox_base := {_bools(base_flat.tolist())};"]
    for cell in sorted(refs):
        out.append(f"  vox_{cell.level}_{cell.x}_{cell.y}_{cell.z} := {_bools(refs[cell].values)};")

    out.append("  -- index structure: leaves visited per step")
    for i, cells in enumerate(visits, start=1):
        expr = " | ".join(array_ref(env, c) for c, _ in cells) or "FALSE"
        out.append(f"  visit_{i} := {expr};")

    arms: dict[str, list[tuple[str, str]]] = {v: [] for v in INDEX_VARS}
    for i, cells in enumerate(visits, start=1):
        for c, _ in cells:
            cond = f"{STEP_VAR} = {i} & {array_ref(env, c)}"
            for var, val in zip(INDEX_VARS, c):
                arms[var].append((cond, str(val)))
    for var in INDEX_VARS:
        out.append(f"  {var} := {_case(arms[var], '0', '  ')};" if arms[var] else f"  {var} := 0;")

    alpha = [(f"{STEP_VAR} = {i}", f"!visit_{i}") for i in range(1, n + 1)
             if visits[i - 1]]
    out.append(f"  alpha := {_case(alpha, 'TRUE', '  ')};" if alpha else "  alpha := TRUE;")
    out.append("INVARSPEC alpha;")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Counterexample logs
# ---------------------------------------------------------------------------

class CounterexampleLogError(ValueError):
    pass


class NoCounterexampleError(CounterexampleLogError):
    pass


class MissingIndexVariableError(CounterexampleLogError):
    pass


class AmbiguousStepError(CounterexampleLogError):
    pass


def counterexample_to_log(cex: Counterexample) -> str:
    """Render ``cex`` the way a symbolic checker prints an invariant trace.

    Only variables that changed are listed after the first state.
    """
    lines = ["-- invariant alpha  is false",
             "-- as demonstrated by the following execution sequence",
             "Trace Description: AG alpha Counterexample",
             "Trace Type: Counterexample"]
    prev: dict[str, str] = {}
    for step in range(1, cex.length + 1):
        state = {STEP_VAR: str(step)}
        cell = cex.violating_cell if step == cex.length else (0, 0, 0, 0)
        state.update(zip(INDEX_VARS, map(str, cell)))
        lines.append(f"  -> State: 1.{step} <-")
        for k, v in state.items():
            if prev.get(k) != v:
                lines.append(f"    {k} = {v}")
        prev = state
    return "\n".join(lines) + "\n"


_STATE_RE = re.compile(r"^\s*->\s*State:\s*(\d+)\.(\d+)\s*<-\s*$")
_ASSIGN_RE = re.compile(r"^\s*([A-Za-z_][\w.\[\]]*)\s*=\s*(\S+)\s*$")


def parse_counterexample_log(text: str, trajectory: Optional[Trajectory] = None) -> Counterexample:
    """Extract the violating step and voxel from a checker's trace output.

    With ``trajectory`` the counterexample also carries pose and trace.
    """
    states: list[dict[str, str]] = []
    numbers: list[tuple[int, int]] = []
    current: dict[str, str] = {}
    in_state = False
    for line in text.splitlines():
        m = _STATE_RE.match(line)
        if m:
            current = dict(current)
            states.append(current)
            numbers.append((int(m.group(1)), int(m.group(2))))
            in_state = True
        elif line.lstrip().startswith("->"):
            # input / combinatorial sections carry no state values
            in_state = False
        elif in_state and (m := _ASSIGN_RE.match(line)):
            current[m.group(1)] = m.group(2)
    if not states:
        raise NoCounterexampleError("log contains no counterexample trace")
    trace_ids = {t for t, _ in numbers}
    if len(trace_ids) != 1 or [s for _, s in numbers] != list(range(1, len(states) + 1)):
        raise AmbiguousStepError(f"state numbering is not a single consecutive trace: {numbers}")
    for i, st in enumerate(states, start=1):
        if STEP_VAR not in st:
            raise MissingIndexVariableError(f"state {i} does not assign '{STEP_VAR}'")
        if st[STEP_VAR] != str(i):
            raise AmbiguousStepError(f"state {i} has {STEP_VAR} = {st[STEP_VAR]}")
    last = states[-1]
    missing = [v for v in INDEX_VARS if v not in last]
    if missing:
        raise MissingIndexVariableError(f"trace lacks voxel index variables {missing}")
    try:
        cell = CellId(*(int(last[v]) for v in INDEX_VARS))
    except ValueError:
        raise MissingIndexVariableError("voxel index variables are not integers") from None
    if cell.level == 0:
        raise MissingIndexVariableError("final state names no violating voxel (vlevel = 0)")
    cell.validate()
    length = len(states)
    pose = None
    trace: tuple = ()
    if trajectory is not None:
        if length > len(trajectory):
            raise AmbiguousStepError(f"trace length {length} exceeds trajectory length {len(trajectory)}")
        pose = trajectory.poses[length - 1]
        trace = tuple((i, p) for i, p in enumerate(trajectory.poses[:length], start=1))
    return Counterexample(length, pose, cell, (cell,), trace)


def run_external_checker(model: Union[str, Path], binary: str = "nuXmv",
                         trajectory: Optional[Trajectory] = None,
                         timeout: Optional[float] = None) -> Optional[Counterexample]:
    """Invoke an installed SMV checker on ``model``; ``None`` means the invariant holds."""
    exe = shutil.which(binary)
    if exe is None:
        raise FileNotFoundError(f"model checker {binary!r} not found on PATH")
    proc = subprocess.run([exe, str(model)], capture_output=True, text=True, timeout=timeout, check=False)
    if proc.returncode != 0:
        raise RuntimeError(f"{binary} exited with {proc.returncode}: {proc.stderr.strip()}")
    if re.search(r"^-- invariant .* is true", proc.stdout, re.M):
        return None
    return parse_counterexample_log(proc.stdout, trajectory)
