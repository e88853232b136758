"""Constructive reductions between the multi-separator problem and related problems.

Every reduction returns a ReductionResult whose value relation is
    source_value = value_sign * (target_value - value_offset)
and whose `map_back` turns a target solution into a source solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import PreconditionError
from .graph_core import Graph, components
from .msp_core import STAR, MspInstance, PartialAssignment
from .oracle import LmpInstance

__all__ = [
    "ReductionResult",
    "msp_to_lmp",
    "lmp_to_msp",
    "qubo_to_msp",
    "steiner_to_msp",
    "mtvs_to_msp",
    "sat3_to_consistency",
]

_EXACT_LIMIT = 2.0**52


@dataclass
class ReductionResult:
    instance: object
    value_offset: float
    value_sign: int
    witness_map: str
    map_back: Callable

    def source_value(self, target_value: float) -> float:
        return self.value_sign * (target_value - self.value_offset)


def _require_connected(graph: Graph) -> None:
    if graph.node_count and components(graph).max() != 0:
        raise PreconditionError("graph must be connected")


def msp_to_lmp(instance: MspInstance) -> ReductionResult:
    """Lifted multicut instance whose optima differ from the MSP optima by -2C|E|(|V|-1).

    Node layout: v -> v, copy of v -> n+v, edge k of G -> 2n+k.
    """
    g = instance.graph
    n = g.node_count
    if n < 2:
        raise PreconditionError("msp_to_lmp needs at least two nodes")
    _require_connected(g)
    edges = g.edges().tolist()
    m = len(edges)
    deg = g.degrees().tolist()
    C = 1.0 + math.fsum(np.abs(instance.node_costs).tolist() + np.abs(instance.ic).tolist())
    if C * n * max(deg) > _EXACT_LIMIT:
        raise PreconditionError("reduced costs would exceed exact double range")
    cost = {}
    for v in range(n):
        cost[(v, n + v)] = C * deg[v]
    lifted = [(int(u), int(w), float(c)) for u, w, c in instance.interactions()]
    for k, (a, b) in enumerate(edges):
        vw = 2 * n + k
        for v in (a, b):
            cost[(v, vw)] = C + instance.node_costs[v] / deg[v]
            lifted.append((n + v, vw, -C * n))
    pairs = sorted(cost)
    graph = Graph(2 * n + m, pairs)
    e = graph.edges().tolist()
    lmp = LmpInstance(graph, [cost[(a, b)] for a, b in e], lifted)
    offset = -2.0 * C * m * (n - 1)

    def map_back(labels) -> frozenset:
        labels = np.asarray(labels)
        return frozenset(v for v in range(n) if labels[v] == labels[n + v])

    return ReductionResult(
        lmp, offset, 1, "S = nodes v that share a component with their copy", map_back
    )


def lmp_to_msp(instance: LmpInstance) -> ReductionResult:
    """MSP instance on G with every edge subdivided; equal optimal values.

    Node layout: v -> v, edge k of G -> n+k.
    """
    g = instance.graph
    _require_connected(g)
    n = g.node_count
    edges = g.edges().tolist()
    m = len(edges)
    C = 1.0 + math.fsum(np.abs(instance.edge_costs).tolist() + np.abs(instance.lc).tolist())
    if C * max(m, 1) * max(n, 1) > _EXACT_LIMIT:
        raise PreconditionError("reduced costs would exceed exact double range")
    pairs = []
    for k, (a, b) in enumerate(edges):
        pairs += [(a, n + k), (b, n + k)]
    graph = Graph(n + m, pairs)
    node_costs = np.concatenate([np.full(n, C * m), np.full(m, C)])
    inter = [(a, b, float(c) - C) for (a, b), c in zip(edges, instance.edge_costs.tolist())]
    inter += instance.lifted()
    msp = MspInstance(graph, inter, node_costs)

    def map_back(S) -> np.ndarray:
        lab = components(graph, S)
        return lab[:n]

    return ReductionResult(
        msp, 0.0, 1, "decomposition = components of the subdivided graph minus S, on V", map_back
    )


def qubo_to_msp(q: dict, n: int) -> ReductionResult:
    """QUBO max over x in {0,1}^n (0-based indices, i <= j) as an MSP with E = F."""
    if n < 1:
        raise PreconditionError("need at least one variable")
    node_costs = np.zeros(n)
    inter = []
    total = []
    for (i, j), val in sorted(q.items()):
        i, j = min(i, j), max(i, j)
        if not (0 <= i < n and 0 <= j < n):
            raise PreconditionError("qubo index out of range")
        total.append(float(val))
        if i == j:
            node_costs[i] += val
        elif val != 0:
            inter.append((i, j, float(val)))
    graph = Graph(n, [(i, j) for i, j, _ in inter])
    if components(graph).max() != 0:
        raise PreconditionError("support graph of q is disconnected; reduce each component separately")
    msp = MspInstance(graph, inter, node_costs)

    def map_back(S) -> tuple:
        S = set(S)
        return tuple(0 if v in S else 1 for v in range(n))

    return ReductionResult(msp, math.fsum(total), -1, "x = 1 - node bits of S", map_back)


def _check_weights(graph: Graph, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (graph.node_count,):
        raise PreconditionError("need one weight per node")
    if np.any(w < 0):
        raise PreconditionError("node weights must be nonnegative")
    return w


def steiner_to_msp(graph: Graph, terminals: Sequence[int], weights) -> ReductionResult:
    """Node-weighted Steiner tree as an MSP: a star of attractive interactions from u_1."""
    w = _check_weights(graph, weights)
    U = list(terminals)
    if not U:
        raise PreconditionError("need at least one terminal")
    _require_connected(graph)
    W = math.fsum(w.tolist())
    node_costs = -w.copy()
    if len(U) == 1:
        # no interaction to keep u_1 out of S; a large node cost does it instead
        node_costs[U[0]] = W + 1
    inter = [(U[0], u, W + 1) for u in U[1:]]
    msp = MspInstance(graph, inter, node_costs)

    def map_back(S) -> frozenset:
        lab = components(graph, S)
        return frozenset(np.flatnonzero(lab == lab[U[0]]).tolist()) if lab[U[0]] >= 0 else frozenset()

    return ReductionResult(msp, -W, 1, "tree = component of V minus S containing u_1", map_back)


def mtvs_to_msp(graph: Graph, terminals: Sequence[int], weights) -> ReductionResult:
    """Multi-terminal vertex separator as an MSP with repulsive terminal pairs."""
    w = _check_weights(graph, weights)
    U = sorted(set(terminals))
    for a in U:
        for b in U:
            if a < b and graph.has_edge(a, b):
                raise PreconditionError("terminals must not be adjacent")
    W = math.fsum(w.tolist())
    node_costs = w.copy()
    node_costs[U] = W + 1
    inter = [(a, b, -(W + 1)) for i, a in enumerate(U) for b in U[i + 1:]]
    msp = MspInstance(graph, inter, node_costs)
    return ReductionResult(
        msp, -len(inter) * (W + 1), 1, "vertex separator = S", lambda S: frozenset(S)
    )


def sat3_to_consistency(formula: Sequence[Sequence[int]]) -> tuple[MspInstance, PartialAssignment]:
    """Gadget whose partial assignment is consistent iff the 3-CNF formula is satisfiable.

    Literals are nonzero ints (negative = negated). Node 0 is s, node 1 is t,
    literal j of clause c is node 2 + 3c + j.
    """
    clauses = [list(c) for c in formula]
    if not clauses:
        raise PreconditionError("formula needs at least one clause")
    for c in clauses:
        if len(c) != 3 or any((not isinstance(l, (int, np.integer))) or l == 0 for l in c):
            raise PreconditionError("every clause needs exactly 3 nonzero integer literals")
    k = len(clauses)
    node = lambda c, j: 2 + 3 * c + j
    edges = [(0, node(0, j)) for j in range(3)]
    for c in range(k - 1):
        edges += [(node(c, a), node(c + 1, b)) for a in range(3) for b in range(3)]
    edges += [(node(k - 1, j), 1) for j in range(3)]
    graph = Graph(2 + 3 * k, edges)
    lits = [(node(c, j), clauses[c][j]) for c in range(k) for j in range(3)]
    inter = [(0, 1, 0.0)]
    for i, (a, la) in enumerate(lits):
        for b, lb in lits[i + 1:]:
            if la == -lb:
                inter.append((a, b, 0.0))
    inst = MspInstance(graph, inter, np.zeros(graph.node_count))
    x = PartialAssignment.all_star(inst)
    x.node_labels[0] = 0
    x.node_labels[1] = 0
    x.interaction_labels[0] = 0
    x.interaction_labels[1:] = 1
    return inst, x
