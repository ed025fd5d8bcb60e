"""Brute-force reference implementations, deliberately sharing no code paths
with the package (only plain numpy and explicit loops)."""
from __future__ import annotations

import itertools

import numpy as np


def voxel_bounds(res, translate=(0.0, 0.0, 0.0), scale=1.0):
    """Per-voxel (min, max) corners for a whole grid, shape (res, res, res, 3)."""
    i = np.arange(res)
    ix, iy, iz = np.meshgrid(i, i, i, indexing="ij")
    idx = np.stack([ix, iy, iz], axis=-1).astype(float)
    t = np.array(translate, dtype=float)
    h = scale / res
    return t + idx * h, t + (idx + 1) * h


def ball_touches(center, radius, lo, hi):
    c = np.array(center, dtype=float)
    d = np.maximum(lo - c, 0) + np.maximum(c - hi, 0)
    return (d * d).sum(axis=-1) <= radius * radius


def first_violation(occ, poses, spheres, translate=(0.0, 0.0, 0.0), scale=1.0):
    """Dense Max-resolution check. Returns 1-based step or None."""
    lo, hi = voxel_bounds(occ.shape[0], translate, scale)
    for step, pose in enumerate(poses, start=1):
        for off, r in spheres:
            c = np.array(pose, dtype=float) + np.array(off, dtype=float)
            if np.any(ball_touches(c, r, lo, hi) & occ):
                return step
    return None


def or_over_block(occ, level, x, y, z):
    """Loop-based OR of all finest voxels below cell (level, x, y, z)."""
    k = occ.shape[0] // level
    for a, b, c in itertools.product(range(k), repeat=3):
        if occ[x * k + a, y * k + b, z * k + c]:
            return True
    return False


def and_over_block(occ, level, x, y, z):
    k = occ.shape[0] // level
    return all(occ[x * k + a, y * k + b, z * k + c]
               for a, b, c in itertools.product(range(k), repeat=3))


def enumerate_leaves(base, refined):
    """Leaves of an abstraction given its refined cell set, as (level, x, y, z)."""
    out = []
    todo = [(base, x, y, z) for x in range(base) for y in range(base) for z in range(base)]
    while todo:
        c = todo.pop()
        if c in refined:
            L, x, y, z = c
            todo += [(2 * L, 2 * x + a, 2 * y + b, 2 * z + d) for a in (0, 1) for b in (0, 1) for d in (0, 1)]
        else:
            out.append(c)
    return sorted(out)


def leaf_box(cell, translate=(0.0, 0.0, 0.0), scale=1.0):
    L, x, y, z = cell
    h = scale / L
    lo = np.array(translate) + np.array([x, y, z]) * h
    hi = np.array(translate) + (np.array([x, y, z]) + 1) * h
    return lo, hi


def brute_force_voxelize_box(bmin, bmax, res, translate=(0.0, 0.0, 0.0), scale=1.0):
    out = np.zeros((res,) * 3, dtype=bool)
    h = scale / res
    for x, y, z in itertools.product(range(res), repeat=3):
        lo = [translate[0] + x * h, translate[1] + y * h, translate[2] + z * h]
        hi = [translate[0] + (x + 1) * h, translate[1] + (y + 1) * h, translate[2] + (z + 1) * h]
        out[x, y, z] = all(lo[a] <= bmax[a] and bmin[a] <= hi[a] for a in range(3))
    return out


def rle_decode(body, d):
    """Hand decoder for binvox data: pairs (value, count), y fastest then z then x."""
    flat = []
    for i in range(0, len(body), 2):
        flat += [body[i]] * body[i + 1]
    occ = np.zeros((d, d, d), dtype=bool)
    for n, v in enumerate(flat):
        x, rem = divmod(n, d * d)
        z, y = divmod(rem, d)
        occ[x, y, z] = bool(v)
    return occ
