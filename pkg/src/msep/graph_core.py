"""Undirected graphs in CSR form, 3-D voxel grids and connectivity under node removal."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import PreconditionError

__all__ = ["Graph", "Grid3", "grid3", "components", "is_separated", "OpCounter", "OPS"]


@dataclass
class OpCounter:
    """Counts elementary work done by connectivity queries (nodes + directed edges scanned)."""

    count: int = 0

    def reset(self) -> None:
        self.count = 0


OPS = OpCounter()


class Graph:
    """Simple undirected graph on nodes 0..n-1 stored as a symmetric CSR structure.

    Neighbor lists are sorted ascending. Self loops and duplicate edges are
    rejected at construction.
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        n = int(node_count)
        if n < 0:
            raise PreconditionError("node_count must be nonnegative")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise PreconditionError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise PreconditionError("self loops are not allowed")
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            key = lo * n + hi
            if len(np.unique(key)) != len(key):
                raise PreconditionError("duplicate edge")
            order = np.argsort(key, kind="stable")
            lo, hi = lo[order], hi[order]
        else:
            lo = hi = np.zeros(0, dtype=np.int64)
        self._init_csr(n, lo, hi)

    def _init_csr(self, n: int, lo: np.ndarray, hi: np.ndarray) -> None:
        self.node_count = n
        self._lo = lo
        self._hi = hi
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        self._adj_lists: list[list[int]] | None = None
        self._csr: csr_matrix | None = None

    @classmethod
    def _from_sorted_pairs(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        g = cls.__new__(cls)
        g._init_csr(n, lo.astype(np.int64), hi.astype(np.int64))
        return g

    @property
    def edge_count(self) -> int:
        return len(self._lo)

    def edges(self) -> np.ndarray:
        """Edges as an (m, 2) array with u < v."""
        return np.stack([self._lo, self._hi], axis=1)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def adjacency_lists(self) -> list[list[int]]:
        """Plain Python neighbor lists, cached; used by the pure-Python solvers."""
        if self._adj_lists is None:
            ind = self.indices.tolist()
            ptr = self.indptr.tolist()
            self._adj_lists = [ind[ptr[v]:ptr[v + 1]] for v in range(self.node_count)]
        return self._adj_lists

    def csr(self) -> csr_matrix:
        if self._csr is None:
            n = self.node_count
            data = np.ones(len(self.indices), dtype=np.int8)
            self._csr = csr_matrix((data, self.indices, self.indptr), shape=(n, n))
        return self._csr

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


class Grid3(Graph):
    """6-connected voxel grid; node id = x + nx*(y + ny*z)."""

    dims: tuple[int, int, int]

    def node_id(self, x: int, y: int, z: int) -> int:
        nx, ny, _ = self.dims
        return x + nx * (y + ny * z)

    def coords(self, v: int) -> tuple[int, int, int]:
        nx, ny, _ = self.dims
        return v % nx, (v // nx) % ny, v // (nx * ny)

    def coord_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nx, ny, nz = self.dims
        v = np.arange(nx * ny * nz)
        return v % nx, (v // nx) % ny, v // (nx * ny)


def grid3(nx: int, ny: int, nz: int) -> Grid3:
    """Build the 6-connected nx*ny*nz voxel grid."""
    if min(nx, ny, nz) < 1:
        raise PreconditionError("grid dimensions must be >= 1")
    ids = np.arange(nx * ny * nz, dtype=np.int64).reshape(nz, ny, nx)
    lo, hi = [], []
    for axis in (2, 1, 0):
        a = np.swapaxes(ids, axis, 0)
        lo.append(a[:-1].ravel())
        hi.append(a[1:].ravel())
    lo = np.concatenate(lo)
    hi = np.concatenate(hi)
    order = np.argsort(lo * (nx * ny * nz) + hi, kind="stable")
    g = Grid3._from_sorted_pairs(nx * ny * nz, lo[order], hi[order])
    g.dims = (int(nx), int(ny), int(nz))
    return g


def _removed_mask(n: int, removed) -> np.ndarray:
    if removed is None:
        return np.zeros(n, dtype=bool)
    if isinstance(removed, np.ndarray) and removed.dtype == bool:
        if removed.shape != (n,):
            raise PreconditionError("removed mask has wrong length")
        return removed
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter(removed, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= n):
        raise PreconditionError("removed node out of range")
    mask[idx] = True
    return mask


def components(graph: Graph, removed=None) -> np.ndarray:
    """Label the components of the graph induced by the non-removed nodes.

    Returns an int64 array; removed nodes get -1. Labels are dense from 0 and
    numbered by the smallest node id they contain, which is exactly the
    labeling produced by BFS started from the lowest unvisited id.
    `removed` may be a boolean mask or an iterable of node ids.
    """
    n = graph.node_count
    mask = _removed_mask(n, removed)
    keep = ~mask
    OPS.count += n + len(graph.indices)
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0 or not keep.any():
        return labels
    src = np.repeat(np.arange(n), graph.degrees())
    live = keep[src] & keep[graph.indices]
    m = csr_matrix(
        (np.ones(int(live.sum()), dtype=np.int8), (src[live], graph.indices[live])),
        shape=(n, n),
    )
    _, raw = connected_components(m, directed=False)
    raw = raw[keep]
    uniq, first = np.unique(raw, return_index=True)
    # order components by the first (smallest) kept node they contain
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    labels[keep] = rank[np.searchsorted(uniq, raw)]
    return labels


def is_separated(graph: Graph, S, u: int, v: int) -> bool:
    """True iff u or v lies in S, or every u-v path meets S."""
    if u == v:
        raise PreconditionError("is_separated needs two distinct nodes")
    mask = _removed_mask(graph.node_count, S)
    if mask[u] or mask[v]:
        return True
    lab = components(graph, mask)
    return bool(lab[u] != lab[v])
