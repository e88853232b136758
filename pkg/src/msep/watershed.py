"""Seeded watershed baseline that returns a multi-separator.

Seeds are the 6-connected components of voxels darker than theta_start.
A priority flood (gray value, then node id) assigns a voxel to the unique
label among its neighbors; voxels touching two labels become line voxels.
The flood stops at the first voxel whose gray value reaches theta_end.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import PreconditionError
from .graph_core import grid3

__all__ = ["WatershedParams", "watershed", "watershed_labels", "FloodRecord", "flood", "sweep_end", "induced_from_regions"]

LINE = -2


@dataclass(frozen=True)
class WatershedParams:
    theta_start: float
    theta_end: float

    def __post_init__(self):
        if not (0.0 <= self.theta_start <= 1.0 and 0.0 <= self.theta_end <= 1.0):
            raise PreconditionError("thresholds must lie in [0, 1]")
        if self.theta_start > self.theta_end:
            raise PreconditionError("theta_start must not exceed theta_end")


@dataclass
class FloodRecord:
    """One flood run to completion; any theta_end result is a prefix of its events."""

    seeds: np.ndarray  # label per voxel after seeding, -1 unlabeled
    order: np.ndarray  # voxels in pop order
    assigned: np.ndarray  # label given at each pop (LINE for line voxels)
    gate: np.ndarray  # running max of popped gray values
    shape: tuple = ()


def _gray(gray) -> np.ndarray:
    g = np.asarray(getattr(gray, "gray", gray), dtype=np.float64)
    if g.ndim != 3:
        raise PreconditionError("gray volume must be a 3-D array indexed [z, y, x]")
    return g


def flood(gray, theta_start: float) -> FloodRecord:
    """Seed with {g < theta_start} and flood every voxel, recording the pop sequence."""
    g3 = _gray(gray)
    nz, ny, nx = g3.shape
    comp, _ = ndimage.label(g3 < theta_start, structure=ndimage.generate_binary_structure(3, 1))
    seeds = comp.ravel().astype(np.int64) - 1
    adj = grid3(nx, ny, nz).adjacency_lists()
    g = g3.ravel().tolist()
    lab = seeds.tolist()
    queued = [l >= 0 for l in lab]
    heap: list[tuple[float, int]] = []
    for v in np.flatnonzero(seeds >= 0).tolist():
        for w in adj[v]:
            if not queued[w]:
                queued[w] = True
                heap.append((g[w], w))
    heapq.heapify(heap)
    order, assigned = [], []
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        gv, v = pop(heap)
        found = -1
        for w in adj[v]:
            l = lab[w]
            if l >= 0:
                if found >= 0 and l != found:
                    found = LINE
                    break
                found = l
        lab[v] = found
        order.append(v)
        assigned.append(found)
        if found >= 0:
            for w in adj[v]:
                if not queued[w]:
                    queued[w] = True
                    push(heap, (g[w], w))
    popped = np.asarray(g, dtype=np.float64)[np.asarray(order, dtype=np.int64)] if order else np.zeros(0)
    return FloodRecord(seeds, np.asarray(order, dtype=np.int64), np.asarray(assigned, dtype=np.int64),
                       np.maximum.accumulate(popped) if len(popped) else popped, g3.shape)


def sweep_end(record: FloodRecord, theta_end: float) -> np.ndarray:
    """Region label per voxel (-1 for separator voxels) for one theta_end, shaped like the volume."""
    k = int(np.searchsorted(record.gate, theta_end, side="left"))
    lab = record.seeds.copy()
    lab[record.order[:k]] = record.assigned[:k]
    lab[lab == LINE] = -1
    return lab.reshape(record.shape) if record.shape else lab


def watershed_labels(gray, params: WatershedParams) -> np.ndarray:
    return sweep_end(flood(gray, params.theta_start), params.theta_end)


def watershed(gray, params: WatershedParams) -> np.ndarray:
    """Separator mask: line voxels and every voxel the flood never assigned."""
    return watershed_labels(gray, params) < 0


def induced_from_regions(labels) -> np.ndarray:
    """Flat induced labeling: regions keep their label, separator voxels become singletons.

    Regions are connected and never 6-adjacent to each other, so this equals
    the components of V minus the separator without another graph search.
    """
    lab = np.asarray(labels, dtype=np.int64).ravel().copy()
    sep = lab < 0
    lab[sep] = (lab.max() + 1 if len(lab) else 0) + np.arange(int(sep.sum()))
    return lab
