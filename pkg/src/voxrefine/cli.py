"""Command-line interface.

Exit codes: 0 verification passed, 1 real counterexample, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .cegar import WorkflowOptions, WorkflowReport, run_direct, run_workflow
from .environment import initial_abstraction
from .scenario import Scenario, load_scenario
from .smv_export import export_smv
from .voxel_grid import BinvoxError, load_scene, save_binvox, voxelize

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

RECORD_FIELDS = ("base_resolution", "max_resolution", "result", "length", "iterations",
                 "refinements", "cell_checks", "wall_time")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _verify(scenario: Scenario, base: int, max_res: int, *, no_refine: bool = False,
            multi_voxel: bool = False, cascade: bool = False) -> WorkflowReport:
    if base > max_res:
        raise ValueError(f"base resolution {base} exceeds max resolution {max_res}")
    grid = scenario.grid_at(max_res)
    if no_refine:
        outcome = run_direct(grid, base, scenario.trajectory, scenario.robot)
        return WorkflowReport(outcome.counterexample, 1, 0, outcome.cell_checks, 0.0, base, max_res)
    opts = WorkflowOptions(base, multi_voxel_refinement=multi_voxel, cascade_fully_solid=cascade)
    return run_workflow(grid, scenario.trajectory, scenario.robot, opts)


def _summary(rep: WorkflowReport) -> str:
    rows = [("result", "PASS" if rep.passed else "FAIL"),
            ("base / max", f"{rep.base_resolution} / {rep.max_resolution}"),
            ("length", "-" if rep.passed else str(rep.length)),
            ("iterations", str(rep.iterations)),
            ("refinements", str(rep.refinements)),
            ("cell checks", str(rep.cell_checks)),
            ("wall time", f"{rep.wall_time:.3f} s")]
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"


def cmd_voxelize(args) -> int:
    grid = voxelize(load_scene(args.scene), args.resolution)
    save_binvox(grid, args.out)
    print(f"wrote {args.out}: resolution {grid.resolution}, {int(grid.occupancy.sum())} solid voxels")
    return EXIT_PASS


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    max_res = args.max or sc.max_resolution
    rep = _verify(sc, args.base, max_res, no_refine=args.no_refine,
                  multi_voxel=args.multi_voxel, cascade=args.cascade)
    sys.stdout.write(_summary(rep))
    if not rep.passed:
        sys.stdout.write(rep.counterexample.to_text())
    if args.json:
        Path(args.json).write_text(json.dumps(rep.to_record(), indent=2) + "\n")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _matrix_cell(job) -> dict:
    path, base, max_res, multi, cascade = job
    rep = _verify(load_scenario(path), base, max_res, multi_voxel=multi, cascade=cascade)
    rec = rep.to_record()
    return {k: rec[k] for k in RECORD_FIELDS}


def matrix(scenario_path, bases: Sequence[int], maxes: Sequence[int], *, workers: int = 1,
           multi_voxel: bool = False, cascade: bool = False) -> list[dict]:
    """One record per ``(base, max)`` pair with ``base <= max``."""
    jobs = [(str(scenario_path), b, m, multi_voxel, cascade)
            for m in maxes for b in bases if b <= m]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_matrix_cell, jobs))
    return [_matrix_cell(j) for j in jobs]


def matrix_table(records: list[dict], value: str = "cell_checks") -> str:
    bases = sorted({r["base_resolution"] for r in records})
    maxes = sorted({r["max_resolution"] for r in records})
    cells = {(r["max_resolution"], r["base_resolution"]): r for r in records}

    def fmt(r):
        if r is None:
            return "-"
        v = r[value]
        return f"{v:.2f}" if isinstance(v, float) else str(v)

    head = ["max\\base"] + [str(b) for b in bases]
    body = [[str(m)] + [fmt(cells.get((m, b))) for b in bases] for m in maxes]
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in [head] + body) + "\n"


def cmd_matrix(args) -> int:
    sc = load_scenario(args.scenario)
    maxes = args.maxes or [sc.max_resolution]
    if any(m > sc.max_resolution for m in maxes):
        raise ValueError(f"max resolutions above the scenario's {sc.max_resolution} are unavailable")
    recs = matrix(args.scenario, args.bases, maxes, workers=args.workers,
                  multi_voxel=args.multi_voxel, cascade=args.cascade)
    for value in ("cell_checks", "wall_time", "length", "refinements"):
        print(f"{value}:")
        sys.stdout.write(matrix_table(recs, value))
    if args.csv:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(recs)
        Path(args.csv).write_text(buf.getvalue())
    if args.json:
        Path(args.json).write_text(json.dumps(recs, indent=2) + "\n")
    return EXIT_PASS


def cmd_export(args) -> int:
    sc = load_scenario(args.scenario)
    max_res = args.max or sc.max_resolution
    if args.base > max_res:
        raise ValueError(f"base resolution {args.base} exceeds max resolution {max_res}")
    grid = sc.grid_at(max_res)
    if args.no_refine:
        env = initial_abstraction(grid, args.base)
    else:
        env = run_workflow(grid, sc.trajectory, sc.robot, WorkflowOptions(args.base)).environment
    out = Path(args.out)
    if args.format == "smv":
        out.write_text(export_smv(env, sc.trajectory, sc.robot))
        print(f"wrote {out}")
    elif args.format == "leaves":
        out.write_text(env.leaf_table())
        print(f"wrote {out}")
    else:
        out.mkdir(parents=True, exist_ok=True)
        levels = sorted({env.base_resolution} | {2 * c.level for c in env.refinements})
        for lvl in levels:
            p = out / f"{sc.name}_base{env.base_resolution}_level{lvl}.binvox"
            save_binvox(env.render(lvl), p)
            print(f"wrote {p}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="voxrefine",
                                 description="Collision verification with selective voxel refinement")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("voxelize", help="voxelize a scene description into a binvox file")
    p.add_argument("scene")
    p.add_argument("-r", "--resolution", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_voxelize)

    def common(p):
        p.add_argument("scenario", help="scenario file or bundled name (collision, near_miss, safe)")
        p.add_argument("--multi-voxel", action="store_true", help="refine every violating voxel of a step")
        p.add_argument("--cascade", action="store_true", help="cascade refinement of fully SOLID voxels")

    p = sub.add_parser("verify", help="run the refinement workflow on a scenario")
    common(p)
    p.add_argument("-b", "--base", type=int, required=True)
    p.add_argument("-m", "--max", type=int, default=None)
    p.add_argument("--no-refine", action="store_true", help="single check at the base resolution")
    p.add_argument("--json", help="write the machine-readable report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("matrix", help="run every base <= max combination")
    common(p)
    p.add_argument("--bases", type=_int_list, default=[2, 4, 8, 16])
    p.add_argument("--maxes", type=_int_list, default=None)
    p.add_argument("-j", "--workers", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("export", help="export the (refined) environment")
    p.add_argument("scenario")
    p.add_argument("-b", "--base", type=int, required=True)
    p.add_argument("-m", "--max", type=int, default=None)
    p.add_argument("-f", "--format", choices=("smv", "leaves", "binvox-per-level"), default="smv")
    p.add_argument("--no-refine", action="store_true", help="export the initial abstraction")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, BinvoxError) as exc:
        print(f"voxrefine: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
