"""Dense voxel grids, binvox I/O, conservative voxelization and cell index algebra.

Occupancy arrays are indexed ``occupancy[x, y, z]``. On disk (binvox) the
voxels are laid out with y running fastest, then z, then x, i.e. the linear
index of ``(x, y, z)`` is ``x * d * d + z * d + y``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

Vec3 = tuple[float, float, float]


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def _check_resolution(resolution: int, name: str = "resolution") -> int:
    if not is_power_of_two(resolution) or resolution < 2:
        raise ValueError(f"{name} must be a power of two >= 2, got {resolution!r}")
    return int(resolution)


def _vec3(v: Iterable[float], name: str = "vector") -> Vec3:
    t = tuple(float(c) for c in v)
    if len(t) != 3:
        raise ValueError(f"{name} must have 3 components, got {len(t)}")
    return t  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Cells and boxes
# ---------------------------------------------------------------------------

class CellId(NamedTuple):
    """One voxel at a given Voxel-resolution ``level``.

    Tuples compare lexicographically on ``(level, x, y, z)``, which is the
    ordering used everywhere for deterministic output.
    """

    level: int
    x: int
    y: int
    z: int

    def validate(self) -> "CellId":
        if not is_power_of_two(self.level):
            raise ValueError(f"cell level must be a power of two: {self}")
        if not all(0 <= i < self.level for i in (self.x, self.y, self.z)):
            raise ValueError(f"cell index out of range: {self}")
        return self

    def __str__(self) -> str:
        return f"({self.level}: {self.x},{self.y},{self.z})"


@dataclass(frozen=True)
class Aabb:
    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "min", _vec3(self.min, "min"))
        object.__setattr__(self, "max", _vec3(self.max, "max"))
        if any(a > b for a, b in zip(self.min, self.max)):
            raise ValueError(f"Aabb min must be <= max componentwise: {self.min} / {self.max}")

    def intersects(self, other: "Aabb") -> bool:
        """Closed-set overlap test (shared faces count)."""
        return all(a0 <= b1 and b0 <= a1 for a0, a1, b0, b1 in
                   zip(self.min, self.max, other.min, other.max))

    def contains_point(self, p: Sequence[float]) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.min, p, self.max))

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.min, self.max))


def children(cell: CellId) -> list[CellId]:
    """The eight cells at ``2 * level`` composing ``cell``.

    Ordered by ``(dz, dy, dx)`` lexicographically, so child ``i`` has
    offsets ``dx = i & 1``, ``dy = (i >> 1) & 1``, ``dz = (i >> 2) & 1``.
    """
    lvl, x, y, z = cell
    return [CellId(2 * lvl, 2 * x + (i & 1), 2 * y + ((i >> 1) & 1), 2 * z + ((i >> 2) & 1))
            for i in range(8)]


def child_index(cell: CellId) -> int:
    """Position of ``cell`` inside its parent's child block."""
    return (cell.x & 1) | ((cell.y & 1) << 1) | ((cell.z & 1) << 2)


def parent(cell: CellId) -> CellId:
    if cell.level < 4:
        raise ValueError(f"cell {cell} at level {cell.level} has no parent below level 2")
    return CellId(cell.level // 2, cell.x // 2, cell.y // 2, cell.z // 2)


def descendant_ranges(cell: CellId, level: int) -> tuple[range, range, range]:
    """Index ranges of the descendants of ``cell`` at a finer ``level``."""
    if level < cell.level or level % cell.level:
        raise ValueError(f"level {level} is not a refinement of {cell.level}")
    k = level // cell.level
    return tuple(range(i * k, i * k + k) for i in (cell.x, cell.y, cell.z))  # type: ignore[return-value]


def descendant_slices(cell: CellId, level: int) -> tuple[slice, slice, slice]:
    k = level // cell.level
    return tuple(slice(i * k, i * k + k) for i in (cell.x, cell.y, cell.z))  # type: ignore[return-value]


def cell_aabb(cell: CellId, translate: Sequence[float] = (0.0, 0.0, 0.0), scale: float = 1.0) -> Aabb:
    # Both corners as translate + index * edge so nested levels share exact
    # float boundaries (edge lengths differ by powers of two).
    edge = scale / cell.level
    idx = (cell.x, cell.y, cell.z)
    return Aabb(tuple(t + i * edge for t, i in zip(translate, idx)),
                tuple(t + (i + 1) * edge for t, i in zip(translate, idx)))


# ---------------------------------------------------------------------------
# Voxel grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Cubic occupancy grid (``True`` = SOLID) with its world transform.

    ``translate`` is the world position of the cube's minimum corner and
    ``scale`` the edge length of the whole cube.
    """

    occupancy: np.ndarray
    translate: Vec3 = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self) -> None:
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.ndim != 3 or len(set(occ.shape)) != 1:
            raise ValueError(f"occupancy must be a cubic 3-D array, got shape {occ.shape}")
        _check_resolution(occ.shape[0])
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        occ = occ.copy()
        occ.flags.writeable = False
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "translate", _vec3(self.translate, "translate"))
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def empty(cls, resolution: int, translate: Sequence[float] = (0.0, 0.0, 0.0),
              scale: float = 1.0) -> "VoxelGrid":
        _check_resolution(resolution)
        return cls(np.zeros((resolution,) * 3, dtype=bool), tuple(translate), scale)

    @property
    def resolution(self) -> int:
        return self.occupancy.shape[0]

    @property
    def bounds(self) -> Aabb:
        return Aabb(self.translate, tuple(t + self.scale for t in self.translate))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (self.translate == other.translate and self.scale == other.scale
                and np.array_equal(self.occupancy, other.occupancy))

    def __repr__(self) -> str:
        return (f"VoxelGrid(resolution={self.resolution}, solid={int(self.occupancy.sum())}, "
                f"translate={self.translate}, scale={self.scale})")

    def downsample(self, resolution: int) -> "VoxelGrid":
        """OR-reduce to a coarser power-of-two resolution."""
        _check_resolution(resolution)
        d = self.resolution
        if resolution > d:
            raise ValueError(f"cannot downsample resolution {d} to {resolution}")
        k = d // resolution
        occ = self.occupancy.reshape(resolution, k, resolution, k, resolution, k).any(axis=(1, 3, 5))
        return VoxelGrid(occ, self.translate, self.scale)


# ---------------------------------------------------------------------------
# binvox
# ---------------------------------------------------------------------------

class BinvoxError(ValueError):
    """Malformed binvox stream; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def parse_binvox(data: bytes) -> VoxelGrid:
    data = bytes(data)
    pos = 0

    def readline() -> tuple[str, int]:
        nonlocal pos
        start = pos
        end = data.find(b"\n", pos)
        if end < 0:
            raise BinvoxError("truncated header", start)
        pos = end + 1
        try:
            return data[start:end].decode("ascii").strip(), start
        except UnicodeDecodeError:
            raise BinvoxError("non-ASCII header line", start) from None

    line, off = readline()
    if not line.startswith("#binvox"):
        raise BinvoxError("missing '#binvox' magic", off)
    dims = translate = scale = None
    while True:
        line, off = readline()
        if not line:
            continue
        key, *vals = line.split()
        try:
            if key == "data":
                break
            elif key == "dim":
                dims = [int(v) for v in vals]
                if len(dims) != 3:
                    raise ValueError
            elif key == "translate":
                translate = tuple(float(v) for v in vals)
                if len(translate) != 3:
                    raise ValueError
            elif key == "scale":
                (scale,) = (float(v) for v in vals)
            else:
                raise BinvoxError(f"unknown header keyword {key!r}", off)
        except ValueError as exc:
            if isinstance(exc, BinvoxError):
                raise
            raise BinvoxError(f"malformed header line {line!r}", off) from None
    header_end = pos
    if dims is None:
        raise BinvoxError("header has no 'dim' line", header_end)
    if len(set(dims)) != 1:
        raise BinvoxError(f"non-cubic dims {dims}", header_end)
    d = dims[0]
    if not is_power_of_two(d) or d < 2:
        raise BinvoxError(f"dim {d} is not a power of two >= 2", header_end)
    if translate is None or scale is None:
        raise BinvoxError("header lacks 'translate' or 'scale'", header_end)
    if not scale > 0:
        raise BinvoxError(f"non-positive scale {scale}", header_end)

    body = np.frombuffer(data, dtype=np.uint8, offset=header_end)
    if len(body) % 2:
        raise BinvoxError("truncated data: odd number of bytes", len(data) - 1)
    values, counts = body[0::2], body[1::2].astype(np.int64)
    total = d ** 3
    ends = np.cumsum(counts)
    if len(ends) and ends[-1] > total:
        bad = int(np.argmax(ends > total))
        raise BinvoxError(f"run-length overflow past {total} voxels", header_end + 2 * bad)
    if not len(ends) or ends[-1] < total:
        have = int(ends[-1]) if len(ends) else 0
        raise BinvoxError(f"truncated data: {have} of {total} voxels", len(data))
    if np.any(counts == 0):
        bad = int(np.argmax(counts == 0))
        raise BinvoxError("zero run length", header_end + 2 * bad + 1)
    if np.any(values > 1):
        bad = int(np.argmax(values > 1))
        raise BinvoxError(f"voxel value {int(values[bad])} not in {{0, 1}}", header_end + 2 * bad)
    flat = np.repeat(values.astype(bool), counts)
    # file order is (x, z, y)
    occ = flat.reshape(d, d, d).transpose(0, 2, 1)
    return VoxelGrid(occ, translate, scale)


def _rle(flat: np.ndarray) -> bytes:
    out = bytearray()
    n = len(flat)
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], change))
    stops = np.concatenate((change, [n]))
    for s, e in zip(starts.tolist(), stops.tolist()):
        v = int(flat[s])
        run = e - s
        while run > 0:
            c = min(run, 255)
            out += bytes((v, c))
            run -= c
    return bytes(out)


def write_binvox(grid: VoxelGrid) -> bytes:
    d = grid.resolution
    header = (f"#binvox 1\ndim {d} {d} {d}\n"
              f"translate {' '.join(repr(t) for t in grid.translate)}\n"
              f"scale {grid.scale!r}\ndata\n")
    flat = grid.occupancy.transpose(0, 2, 1).reshape(-1)
    return header.encode("ascii") + _rle(flat)


def read_binvox(path: Union[str, Path]) -> VoxelGrid:
    return parse_binvox(Path(path).read_bytes())


def save_binvox(grid: VoxelGrid, path: Union[str, Path]) -> None:
    Path(path).write_bytes(write_binvox(grid))


# ---------------------------------------------------------------------------
# Scenes and voxelization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    min: Vec3
    max: Vec3
    kind: str = field(default="box", init=False)

    def __post_init__(self) -> None:
        Aabb(self.min, self.max)  # validates ordering
        object.__setattr__(self, "min", _vec3(self.min))
        object.__setattr__(self, "max", _vec3(self.max))

    @property
    def aabb(self) -> Aabb:
        return Aabb(self.min, self.max)


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float
    kind: str = field(default="sphere", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _vec3(self.center))
        if not self.radius > 0:
            raise ValueError(f"sphere radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def aabb(self) -> Aabb:
        return Aabb(tuple(c - self.radius for c in self.center),
                    tuple(c + self.radius for c in self.center))


Primitive = Union[Box, Sphere]


def sphere_aabb_intersects(center: Sequence[float], radius: float,
                           mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """Closed sphere vs. closed boxes (``mins``/``maxs`` shaped ``(..., 3)``)."""
    c = np.asarray(center, dtype=float)
    closest = np.clip(c, mins, maxs)
    return ((closest - c) ** 2).sum(axis=-1) <= radius * radius


@dataclass(frozen=True)
class SceneDescription:
    primitives: tuple[Primitive, ...]
    domain: Aabb

    def __post_init__(self) -> None:
        object.__setattr__(self, "primitives", tuple(self.primitives))
        for p in self.primitives:
            if isinstance(p, Box):
                hit = p.aabb.intersects(self.domain)
            else:
                hit = bool(sphere_aabb_intersects(p.center, p.radius, np.array(self.domain.min),
                                                  np.array(self.domain.max)))
            if not hit:
                raise ValueError(f"primitive {p} does not intersect the scene domain")

    @property
    def cube(self) -> tuple[Vec3, float]:
        """``(translate, scale)`` of the smallest cube anchored at ``domain.min``."""
        scale = max(b - a for a, b in zip(self.domain.min, self.domain.max))
        if not scale > 0:
            raise ValueError("scene domain has zero extent")
        return self.domain.min, scale

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneDescription":
        prims: list[Primitive] = []
        for i, p in enumerate(doc.get("primitives", [])):
            kind = p.get("kind")
            if kind == "box":
                prims.append(Box(p["min"], p["max"]))
            elif kind == "sphere":
                prims.append(Sphere(p["center"], p["radius"]))
            else:
                raise ValueError(f"primitives[{i}]: unknown kind {kind!r}")
        dom = doc["domain"]
        return cls(tuple(prims), Aabb(dom["min"], dom["max"]))

    def to_dict(self) -> dict:
        prims = []
        for p in self.primitives:
            if isinstance(p, Box):
                prims.append({"kind": "box", "min": list(p.min), "max": list(p.max)})
            else:
                prims.append({"kind": "sphere", "center": list(p.center), "radius": p.radius})
        return {"primitives": prims,
                "domain": {"min": list(self.domain.min), "max": list(self.domain.max)}}


def load_scene(path: Union[str, Path]) -> SceneDescription:
    return SceneDescription.from_dict(json.loads(Path(path).read_text()))


def _index_window(lo: float, hi: float, translate: float, edge: float, n: int) -> tuple[int, int]:
    # cells i with [t + i*e, t + (i+1)*e] meeting [lo, hi], widened by one
    # and left to the exact test to trim
    a = math.floor((lo - translate) / edge) - 1
    b = math.floor((hi - translate) / edge) + 1
    return max(a, 0), min(b, n - 1)


def voxelize(scene: SceneDescription, resolution: int) -> VoxelGrid:
    """Conservative fill: a voxel is SOLID iff a primitive touches its closed box."""
    if not is_power_of_two(resolution) or resolution < 2:
        raise ValueError(f"resolution must be a power of two >= 2, got {resolution!r}")
    translate, scale = scene.cube
    edge = scale / resolution
    occ = np.zeros((resolution,) * 3, dtype=bool)
    for prim in scene.primitives:
        box = prim.aabb
        win = [_index_window(box.min[a], box.max[a], translate[a], edge, resolution) for a in range(3)]
        if any(lo > hi for lo, hi in win):
            continue
        ax = [np.arange(lo, hi + 1) for lo, hi in win]
        idx = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)
        t = np.asarray(translate)
        mins = t + idx * edge
        maxs = t + (idx + 1) * edge
        if isinstance(prim, Box):
            hit = np.all((mins <= np.asarray(prim.max)) & (maxs >= np.asarray(prim.min)), axis=-1)
        else:
            hit = sphere_aabb_intersects(prim.center, prim.radius, mins, maxs)
        sl = tuple(slice(lo, hi + 1) for lo, hi in win)
        occ[sl] |= hit
    return VoxelGrid(occ, translate, scale)
