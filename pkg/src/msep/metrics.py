"""Separator-induced partitions and variation of information with node masses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

from .errors import PreconditionError
from .graph_core import Graph, _removed_mask, components

__all__ = [
    "Partition",
    "ProbabilityMass",
    "ViReport",
    "induced_partition",
    "induced_labels",
    "vi",
    "vi_labels",
    "viws",
    "vins",
    "class_balanced_mass",
    "scores_from_labels",
]


class Partition:
    """Partition of a finite ground set, stored as one label per element."""

    def __init__(self, blocks: Iterable[Iterable[Hashable]]):
        elems, labs = [], []
        for b, block in enumerate(blocks):
            block = list(block)
            if not block:
                raise PreconditionError("partition blocks must be nonempty")
            elems.extend(block)
            labs.extend([b] * len(block))
        if len(set(elems)) != len(elems):
            raise PreconditionError("partition blocks must be disjoint")
        self.elements = tuple(elems)
        self.labels = np.asarray(labs, dtype=np.int64)
        self._index = {e: i for i, e in enumerate(self.elements)}

    @classmethod
    def from_labels(cls, labels, elements=None) -> "Partition":
        labels = np.asarray(labels)
        elements = list(range(len(labels))) if elements is None else list(elements)
        groups: dict = {}
        for e, l in zip(elements, labels.tolist()):
            groups.setdefault(l, []).append(e)
        return cls(groups.values())

    @property
    def blocks(self) -> list[frozenset]:
        out: dict = {}
        for e, l in zip(self.elements, self.labels.tolist()):
            out.setdefault(l, set()).add(e)
        return [frozenset(b) for b in out.values()]

    def labels_for(self, elements) -> np.ndarray:
        try:
            return self.labels[[self._index[e] for e in elements]]
        except KeyError as exc:
            raise PreconditionError("partitions have different ground sets") from exc

    def __len__(self) -> int:
        return len(self.elements)


class ProbabilityMass:
    """Nonnegative masses over a ground set summing to 1."""

    def __init__(self, mass: dict):
        self.elements = tuple(mass)
        self.values = np.asarray([float(mass[e]) for e in self.elements], dtype=np.float64)
        if np.any(self.values < 0):
            raise PreconditionError("masses must be nonnegative")
        if abs(self.values.sum() - 1.0) > 1e-12 * max(1, len(self.values)):
            raise PreconditionError("masses must sum to 1")

    @classmethod
    def uniform(cls, elements) -> "ProbabilityMass":
        elements = list(elements)
        return cls({e: 1.0 / len(elements) for e in elements})


@dataclass(frozen=True)
class ViReport:
    vi: float
    false_cut: float
    false_join: float


def _entropy(weights: np.ndarray) -> float:
    w = weights[weights > 0]
    return float(-(w * np.log2(w)).sum())


def _joint_weights(a: np.ndarray, b: np.ndarray, mass: np.ndarray):
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    na = int(ia.max()) + 1 if len(ia) else 0
    pa = np.bincount(ia, weights=mass, minlength=na)
    pb = np.bincount(ib, weights=mass)
    _, iab = np.unique(ia.astype(np.int64) * (int(ib.max()) + 1 if len(ib) else 1) + ib, return_inverse=True)
    pab = np.bincount(iab, weights=mass)
    return pa, pb, pab


def vi_labels(a, b, mass) -> ViReport:
    """VI between two labelings of the same elements under per-element mass.

    false_cut = H(A|B) and false_join = H(B|A), A being the prediction.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    mass = np.asarray(mass, dtype=np.float64)
    if not (a.shape == b.shape == mass.shape):
        raise PreconditionError("labelings and mass must have equal length")
    if len(a) == 0:
        return ViReport(0.0, 0.0, 0.0)
    pa, pb, pab = _joint_weights(a, b, mass)
    ha, hb, hab = _entropy(pa), _entropy(pb), _entropy(pab)
    fc = max(hab - hb, 0.0)
    fj = max(hab - ha, 0.0)
    return ViReport(fc + fj, fc, fj)


def vi(A: Partition, B: Partition, p: ProbabilityMass) -> ViReport:
    """Variation of information 2H(A,B) - H(A) - H(B) in bits."""
    if set(A.elements) != set(B.elements) or set(p.elements) != set(A.elements):
        raise PreconditionError("partitions and mass must share one ground set")
    order = p.elements
    return vi_labels(A.labels_for(order), B.labels_for(order), p.values)


def induced_labels(graph: Graph, S) -> np.ndarray:
    """Component label per node, with a fresh singleton label for every separator node."""
    mask = _removed_mask(graph.node_count, S)
    lab = components(graph, mask)
    k = int(lab.max()) + 1 if graph.node_count else 0
    sep = np.flatnonzero(mask)
    lab[sep] = k + np.arange(len(sep))
    return lab


def induced_partition(graph: Graph, S) -> Partition:
    """Components of V minus S plus one singleton per separator node."""
    return Partition.from_labels(induced_labels(graph, S))


def viws(graph: Graph, predicted, truth) -> ViReport:
    """VI of induced partitions with half the mass on the true separator, half elsewhere."""
    T = _removed_mask(graph.node_count, truth)
    mass = class_balanced_mass(T)
    return vi_labels(induced_labels(graph, predicted), induced_labels(graph, T), mass)


def class_balanced_mass(truth_mask) -> np.ndarray:
    """Half the mass spread over the truth separator, half over the other nodes."""
    T = np.asarray(truth_mask, dtype=bool)
    n, t = T.size, int(T.sum())
    if t == 0 or t == n:
        raise PreconditionError(
            "class-balanced mass needs a truth separator that is neither empty nor all nodes; use uniform mass instead"
        )
    return np.where(T, 0.5 / t, 0.5 / (n - t))


def scores_from_labels(pred_labels, pred_mask, truth_labels, truth_mask) -> tuple[ViReport, ViReport]:
    """(viws, vins) from precomputed induced labelings.

    Both labelings must come from `induced_labels` or follow the same
    convention (separator nodes are singletons). Sweeps use this to avoid
    recomputing components of the fixed truth.
    """
    a = np.asarray(pred_labels)
    b = np.asarray(truth_labels)
    T = np.asarray(truth_mask, dtype=bool)
    ws = vi_labels(a, b, class_balanced_mass(T))
    U = ~(np.asarray(pred_mask, dtype=bool) | T)
    k = int(U.sum())
    ns = vi_labels(a[U], b[U], np.full(k, 1.0 / k)) if k else ViReport(0.0, 0.0, 0.0)
    return ws, ns


def vins(graph: Graph, predicted, truth) -> ViReport:
    """VI restricted to nodes outside both separators, uniform mass; zeros if none remain."""
    n = graph.node_count
    P = _removed_mask(n, predicted)
    T = _removed_mask(n, truth)
    U = ~(P | T)
    k = int(U.sum())
    if k == 0:
        return ViReport(0.0, 0.0, 0.0)
    a = induced_labels(graph, P)[U]
    b = induced_labels(graph, T)[U]
    return vi_labels(a, b, np.full(k, 1.0 / k))
