"""Multi-separator instances, the objective, characteristic vectors and the
two linear-time consistency deciders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError
from .graph_core import OPS, Graph, _removed_mask, components

__all__ = [
    "MspInstance",
    "SolutionVector",
    "PartialAssignment",
    "STAR",
    "as_mask",
    "separated_interactions",
    "separated_mask",
    "objective",
    "characteristic_vector",
    "consistency_zero_star",
    "consistency_one_star",
]

STAR = 2  # label for "no assignment" in a PartialAssignment


class MspInstance:
    """Graph G=(V,E), interactions F with costs c_f, and node costs c_v.

    Interactions are an indexed list; index k refers to (iu[k], iv[k], ic[k]).
    Duplicate unordered pairs and self pairs are rejected.
    """

    def __init__(self, graph: Graph, interactions=(), node_costs=None):
        n = graph.node_count
        if isinstance(interactions, tuple) and len(interactions) == 3 and all(
            isinstance(a, np.ndarray) for a in interactions
        ):
            iu, iv, ic = interactions
        else:
            rows = list(interactions)
            iu = np.array([r[0] for r in rows], dtype=np.int64)
            iv = np.array([r[1] for r in rows], dtype=np.int64)
            ic = np.array([r[2] for r in rows], dtype=np.float64)
        self.graph = graph
        self.iu = np.ascontiguousarray(iu, dtype=np.int64)
        self.iv = np.ascontiguousarray(iv, dtype=np.int64)
        self.ic = np.ascontiguousarray(ic, dtype=np.float64)
        if node_costs is None:
            node_costs = np.zeros(n)
        self.node_costs = np.ascontiguousarray(node_costs, dtype=np.float64)
        if self.node_costs.shape != (n,):
            raise PreconditionError("node_costs must have one entry per node")
        if not (len(self.iu) == len(self.iv) == len(self.ic)):
            raise PreconditionError("interaction arrays differ in length")
        if len(self.iu):
            if min(self.iu.min(), self.iv.min()) < 0 or max(self.iu.max(), self.iv.max()) >= n:
                raise PreconditionError("interaction endpoint out of range")
            if np.any(self.iu == self.iv):
                raise PreconditionError("interaction endpoints must differ")
            lo = np.minimum(self.iu, self.iv)
            hi = np.maximum(self.iu, self.iv)
            key = lo * n + hi
            if len(np.unique(key)) != len(key):
                raise PreconditionError("duplicate interaction pair")
        self._edge_mask: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def interaction_count(self) -> int:
        return len(self.iu)

    def interactions(self) -> list[tuple[int, int, float]]:
        return list(zip(self.iu.tolist(), self.iv.tolist(), self.ic.tolist()))

    def interaction_is_edge(self) -> np.ndarray:
        """Boolean mask over F: True where the pair is also an edge of G."""
        if self._edge_mask is None:
            g = self.graph
            n = g.node_count
            lo = np.minimum(self.iu, self.iv)
            hi = np.maximum(self.iu, self.iv)
            ekey = np.sort(g._lo * n + g._hi)
            key = lo * n + hi
            pos = np.searchsorted(ekey, key)
            pos = np.minimum(pos, max(len(ekey) - 1, 0))
            self._edge_mask = (ekey[pos] == key) if len(ekey) else np.zeros(len(key), bool)
        return self._edge_mask

    def with_costs(self, node_costs=None, interaction_costs=None) -> "MspInstance":
        nc = self.node_costs if node_costs is None else node_costs
        ic = self.ic if interaction_costs is None else interaction_costs
        out = MspInstance.__new__(MspInstance)
        out.graph = self.graph
        out.iu, out.iv = self.iu, self.iv
        out.ic = np.ascontiguousarray(ic, dtype=np.float64)
        out.node_costs = np.ascontiguousarray(nc, dtype=np.float64)
        out._edge_mask = self._edge_mask
        return out

    def __repr__(self) -> str:
        return f"MspInstance(nodes={self.node_count}, edges={self.graph.edge_count}, interactions={self.interaction_count})"


@dataclass(frozen=True)
class SolutionVector:
    node_bits: np.ndarray
    interaction_bits: np.ndarray

    def dot(self, instance: MspInstance) -> float:
        return float(self.node_bits @ instance.node_costs + self.interaction_bits @ instance.ic)


@dataclass
class PartialAssignment:
    """Labels in {0, 1, STAR} for every node and every interaction."""

    node_labels: np.ndarray
    interaction_labels: np.ndarray

    @classmethod
    def all_star(cls, instance: MspInstance) -> "PartialAssignment":
        return cls(
            np.full(instance.node_count, STAR, dtype=np.int8),
            np.full(instance.interaction_count, STAR, dtype=np.int8),
        )

    @classmethod
    def from_maps(cls, instance: MspInstance, nodes: dict | None = None, interactions: dict | None = None):
        x = cls.all_star(instance)
        for v, lab in (nodes or {}).items():
            x.node_labels[v] = lab
        for k, lab in (interactions or {}).items():
            x.interaction_labels[k] = lab
        return x

    def validate(self, instance: MspInstance) -> None:
        if self.node_labels.shape != (instance.node_count,) or self.interaction_labels.shape != (
            instance.interaction_count,
        ):
            raise PreconditionError("partial assignment domain must be exactly V and F")
        for arr in (self.node_labels, self.interaction_labels):
            if len(arr) and not np.isin(arr, (0, 1, STAR)).all():
                raise PreconditionError("labels must be 0, 1 or *")


def as_mask(n: int, S) -> np.ndarray:
    """Boolean membership mask of length n for a node set or mask."""
    return _removed_mask(n, S).copy() if not isinstance(S, np.ndarray) or S.dtype != bool else S


def separated_mask(instance: MspInstance, S) -> np.ndarray:
    """Boolean mask over F of the interactions separated by S (one components() pass)."""
    mask = _removed_mask(instance.node_count, S)
    lab = components(instance.graph, mask)
    OPS.count += instance.interaction_count
    a, b = lab[instance.iu], lab[instance.iv]
    return (a < 0) | (b < 0) | (a != b)


def separated_interactions(instance: MspInstance, S) -> set[int]:
    """Indices of the interactions separated by S."""
    return set(np.flatnonzero(separated_mask(instance, S)).tolist())


def objective(instance: MspInstance, S) -> float:
    """Sum of node costs over S plus costs of the interactions S separates."""
    mask = _removed_mask(instance.node_count, S)
    sep = separated_mask(instance, mask)
    return float(instance.node_costs[mask].sum() + instance.ic[sep].sum())


def characteristic_vector(instance: MspInstance, S) -> SolutionVector:
    mask = _removed_mask(instance.node_count, S)
    return SolutionVector(mask.astype(np.uint8), separated_mask(instance, mask).astype(np.uint8))


def consistency_zero_star(instance: MspInstance, x: PartialAssignment) -> bool:
    """Decide consistency when every interaction is labeled 0 or *.

    Removing the 1-labeled nodes is the only candidate extension worth
    checking: any 0-labeled interaction must then stay inside one component.
    """
    x.validate(instance)
    if np.any(x.interaction_labels == 1):
        raise PreconditionError("zero-star decider needs interaction labels in {0,*}")
    S = x.node_labels == 1
    lab = components(instance.graph, S)
    zero = x.interaction_labels == 0
    OPS.count += instance.interaction_count
    a, b = lab[instance.iu[zero]], lab[instance.iv[zero]]
    return bool(np.all((a >= 0) & (a == b)))


def consistency_one_star(instance: MspInstance, x: PartialAssignment) -> bool:
    """Decide consistency when interactions outside E are labeled 1 or *.

    The extension takes every node not forced out of the separator; nodes
    are forced out by a 0 label or by being the endpoint of a 0-labeled
    edge-interaction.
    """
    x.validate(instance)
    is_edge = instance.interaction_is_edge()
    if np.any((x.interaction_labels == 0) & ~is_edge):
        raise PreconditionError("one-star decider needs labels in {1,*} on interactions outside E")
    OPS.count += instance.interaction_count + instance.node_count
    zero = x.interaction_labels == 0
    u0, v0 = instance.iu[zero], instance.iv[zero]
    if np.any(x.node_labels[u0] == 1) or np.any(x.node_labels[v0] == 1):
        return False
    S = x.node_labels != 0
    S[u0] = False
    S[v0] = False
    lab = components(instance.graph, S)
    one = x.interaction_labels == 1
    a, b = lab[instance.iu[one]], lab[instance.iv[one]]
    return bool(np.all((a < 0) | (b < 0) | (a != b)))
