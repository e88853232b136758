"""Multi-separator instances from gray volumes: log-odds node costs and
interactions along digital straight lines."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .graph_core import grid3
from .msp_core import MspInstance

__all__ = [
    "CELL_OFFSETS",
    "node_costs",
    "digital_line",
    "long_range_offsets",
    "build_filament_instance",
    "build_cell_instance",
    "apply_bias",
]

CELL_OFFSETS = (
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (5, 0, 0), (0, 5, 0), (0, 0, 5),
    (0, 4, 4), (0, 4, -4), (4, 4, 0), (4, -4, 0), (4, 0, 4), (4, 0, -4),
    (3, 3, 3), (3, 3, -3), (3, -3, 3), (3, -3, -3),
)

_EPS = 1e-6


def node_costs(gray) -> np.ndarray:
    """ln((1-g)/g) per voxel in node order, with g clamped to [1e-6, 1-1e-6]."""
    g = np.clip(np.asarray(getattr(gray, "gray", gray), dtype=np.float64).ravel(), _EPS, 1.0 - _EPS)
    return np.log((1.0 - g) / g)


def _round_half_up(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def digital_line(u: Sequence[int], v: Sequence[int]) -> list[tuple[int, ...]]:
    """Voxels of the digital straight line from u to v, both endpoints included.

    One step per unit along the dominant axis; the other coordinates are
    rounded half up with exact integer arithmetic, which makes the line
    symmetric (reversing u and v reverses the list) and translation invariant.
    """
    u = tuple(int(a) for a in u)
    v = tuple(int(a) for a in v)
    if u == v:
        raise PreconditionError("digital_line needs two distinct voxels")
    delta = [b - a for a, b in zip(u, v)]
    N = max(abs(d) for d in delta)
    return [tuple(a + _round_half_up(k * d, N) for a, d in zip(u, delta)) for k in range(N + 1)]


def _canonical(d: Sequence[int]) -> bool:
    for x in d:
        if x != 0:
            return x > 0
    return False


def long_range_offsets(distance: int = 8) -> list[tuple[int, int, int]]:
    """Canonical integer offsets whose Euclidean length rounds to `distance`."""
    lo2 = (distance - 0.5) ** 2
    hi2 = (distance + 0.5) ** 2
    R = distance + 1
    out = []
    for d in itertools.product(range(-R, R + 1), repeat=3):
        s = d[0] ** 2 + d[1] ** 2 + d[2] ** 2
        if lo2 <= s < hi2 and _canonical(d):
            out.append(d)
    return out


def _shifted_view(a: np.ndarray, lo: Sequence[int], hi: Sequence[int], shift: Sequence[int]) -> np.ndarray:
    """Slice of a [z, y, x] array for base coordinates in [lo, hi) shifted by (dx, dy, dz)."""
    (x0, y0, z0), (x1, y1, z1), (dx, dy, dz) = lo, hi, shift
    return a[z0 + dz:z1 + dz, y0 + dy:y1 + dy, x0 + dx:x1 + dx]


def _offset_pairs(dims, delta, costs3: np.ndarray, reduce: str, include_endpoints: bool):
    """All in-bounds pairs (u, u+delta) with the median or minimum cost along their line."""
    nx, ny, nz = dims
    lo = [max(0, -d) for d in delta]
    hi = [n - max(0, d) for n, d in zip((nx, ny, nz), delta)]
    if any(h <= l for l, h in zip(lo, hi)):
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
    line = digital_line((0, 0, 0), delta)
    if not include_endpoints and len(line) > 2:
        line = line[1:-1]
    stack = np.stack([_shifted_view(costs3, lo, hi, s).ravel() for s in line])
    if reduce == "median":
        cost = np.median(stack, axis=0)
    else:
        cost = stack.min(axis=0)
    ids = np.arange(nx * ny * nz, dtype=np.int64).reshape(nz, ny, nx)
    src = _shifted_view(ids, lo, hi, (0, 0, 0)).ravel()
    dst = _shifted_view(ids, lo, hi, delta).ravel()
    return src, dst, cost


def _gray_array(gray) -> np.ndarray:
    g = np.asarray(getattr(gray, "gray", gray), dtype=np.float64)
    if g.ndim != 3:
        raise PreconditionError("gray volume must be a 3-D array indexed [z, y, x]")
    return g


def build_filament_instance(gray, long_range_distance: int = 8, include_endpoints: bool = True) -> MspInstance:
    """Grid edges with mean endpoint cost, plus long-range pairs whose line median is positive."""
    g = _gray_array(gray)
    nz, ny, nx = g.shape
    dims = (nx, ny, nz)
    graph = grid3(*dims)
    c = node_costs(g)
    c3 = c.reshape(nz, ny, nx)
    e = graph.edges()
    parts_u, parts_v, parts_c = [e[:, 0]], [e[:, 1]], [(c[e[:, 0]] + c[e[:, 1]]) / 2.0]
    for delta in long_range_offsets(long_range_distance):
        u, v, w = _offset_pairs(dims, delta, c3, "median", include_endpoints)
        keep = w > 0
        parts_u.append(u[keep])
        parts_v.append(v[keep])
        parts_c.append(w[keep])
    inter = (np.concatenate(parts_u), np.concatenate(parts_v), np.concatenate(parts_c))
    return MspInstance(graph, inter, c)


def build_cell_instance(gray, offsets: Sequence[Sequence[int]] = CELL_OFFSETS, include_endpoints: bool = True) -> MspInstance:
    """One interaction per in-bounds (voxel, offset) with the minimum cost along the line."""
    offs = [tuple(int(x) for x in d) for d in offsets]
    if len(set(offs)) != len(offs) or not all(_canonical(d) for d in offs):
        raise PreconditionError("offsets must be distinct and canonical (first nonzero coordinate positive)")
    g = _gray_array(gray)
    nz, ny, nx = g.shape
    dims = (nx, ny, nz)
    graph = grid3(*dims)
    c = node_costs(g)
    c3 = c.reshape(nz, ny, nx)
    parts = [_offset_pairs(dims, d, c3, "min", include_endpoints) for d in offs]
    inter = tuple(np.concatenate([p[i] for p in parts]) for i in range(3))
    return MspInstance(graph, inter, c)


def apply_bias(instance: MspInstance, b: float, nodes_only: bool = False) -> MspInstance:
    """Copy with b added to every node cost and, unless nodes_only, every interaction cost."""
    nc = instance.node_costs + b
    ic = instance.ic if nodes_only else instance.ic + b
    return instance.with_costs(nc, ic)
