"""Exhaustive reference solvers. Slow by design; only tests and the CLI
`oracle` command use them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceTooLarge, PreconditionError
from .graph_core import Graph
from .msp_core import STAR, MspInstance, PartialAssignment, objective

__all__ = [
    "LmpInstance",
    "lmp_objective",
    "brute_force_msp",
    "brute_force_lmp",
    "brute_force_consistency",
    "brute_force_qubo",
]

_CHUNK = 1 << 15


class LmpInstance:
    """Lifted multicut instance: graph G with edge costs plus lifted pairs outside E.

    `edge_costs[k]` belongs to `graph.edges()[k]`.
    """

    def __init__(self, graph: Graph, edge_costs, lifted=()):
        self.graph = graph
        self.edge_costs = np.asarray(edge_costs, dtype=np.float64)
        if self.edge_costs.shape != (graph.edge_count,):
            raise PreconditionError("need one cost per edge")
        rows = list(lifted)
        self.lu = np.array([r[0] for r in rows], dtype=np.int64)
        self.lv = np.array([r[1] for r in rows], dtype=np.int64)
        self.lc = np.array([r[2] for r in rows], dtype=np.float64)
        seen = set()
        for u, v in zip(self.lu.tolist(), self.lv.tolist()):
            key = (min(u, v), max(u, v))
            if u == v or key in seen or graph.has_edge(u, v):
                raise PreconditionError("lifted pairs must be distinct non-edges")
            seen.add(key)

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def lifted(self) -> list[tuple[int, int, float]]:
        return list(zip(self.lu.tolist(), self.lv.tolist(), self.lc.tolist()))


def lmp_objective(instance: LmpInstance, labels: np.ndarray) -> float:
    """Cost of the decomposition given by node labels (edges and lifted pairs cut)."""
    e = instance.graph.edges()
    cut_e = labels[e[:, 0]] != labels[e[:, 1]]
    cut_l = labels[instance.lu] != labels[instance.lv]
    return math.fsum(instance.edge_costs[cut_e].tolist() + instance.lc[cut_l].tolist())


def _reach_kept(adj: list[list[int]], n: int, kept: np.ndarray) -> np.ndarray:
    """For each subset (bitmask of kept nodes) and node v, the bitmask of kept
    nodes reachable from v inside the kept set. Shape (n, len(kept))."""
    one = np.uint64(1)
    bits = [((kept >> np.uint64(v)) & one).astype(bool) for v in range(n)]
    R = np.zeros((n, len(kept)), dtype=np.uint64)
    for v in range(n):
        R[v][bits[v]] = one << np.uint64(v)
    while True:
        changed = False
        for v in range(n):
            if not adj[v]:
                continue
            new = R[v].copy()
            for w in adj[v]:
                new |= R[w]
            new[~bits[v]] = 0
            if not changed and not np.array_equal(new, R[v]):
                changed = True
            R[v] = new
        if not changed:
            return R


def _separated_table(instance: MspInstance, subsets: np.ndarray) -> np.ndarray:
    """Boolean table [subset, interaction] of separation, for node subsets given as bitmasks."""
    n = instance.node_count
    full = np.uint64((1 << n) - 1)
    kept = (~subsets) & full
    R = _reach_kept(instance.graph.adjacency_lists(), n, kept)
    one = np.uint64(1)
    out = np.empty((len(subsets), instance.interaction_count), dtype=bool)
    for k, (u, v) in enumerate(zip(instance.iu.tolist(), instance.iv.tolist())):
        out[:, k] = ((R[u] >> np.uint64(v)) & one) == 0
    return out


def _subset_bits(subsets: np.ndarray, n: int) -> np.ndarray:
    one = np.uint64(1)
    return np.stack([((subsets >> np.uint64(v)) & one) for v in range(n)], axis=1).astype(np.float64)


def brute_force_msp(instance: MspInstance, max_nodes: int = 20) -> tuple[frozenset, float]:
    """Minimum objective over all 2^|V| separators.

    Ties (after exact re-evaluation) go to the lexicographically smallest
    sorted subset.
    """
    n = instance.node_count
    if n > max_nodes:
        raise InstanceTooLarge(f"brute_force_msp supports at most {max_nodes} nodes, got {n}")
    scale = 1.0 + float(np.abs(instance.node_costs).sum() + np.abs(instance.ic).sum())
    tol = 1e-9 * scale
    best_val = math.inf
    cands: list[int] = []
    total = 1 << n
    for start in range(0, total, _CHUNK):
        subsets = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
        sep = _separated_table(instance, subsets)
        vals = _subset_bits(subsets, n) @ instance.node_costs + sep.astype(np.float64) @ instance.ic
        lo = float(vals.min())
        if lo < best_val - tol:
            best_val = lo
            cands = []
        if lo <= best_val + tol:
            best_val = min(best_val, lo)
            cands.extend(subsets[vals <= best_val + tol].tolist())
    # exact re-evaluation of near-optimal candidates
    exact = []
    for s in cands:
        members = tuple(v for v in range(n) if (s >> v) & 1)
        exact.append((_exact_objective(instance, members), members))
    best = min(val for val, _ in exact)
    winner = min(m for val, m in exact if val == best)
    return frozenset(winner), best


def _exact_objective(instance: MspInstance, members) -> float:
    from .msp_core import separated_mask

    mask = np.zeros(instance.node_count, dtype=bool)
    mask[list(members)] = True
    sep = separated_mask(instance, mask)
    return math.fsum(instance.node_costs[mask].tolist() + instance.ic[sep].tolist())


def brute_force_consistency(instance: MspInstance, x: PartialAssignment, max_nodes: int = 15) -> bool:
    """True iff some separator matches every fixed label of x."""
    x.validate(instance)
    n = instance.node_count
    if n > max_nodes:
        raise InstanceTooLarge(f"brute_force_consistency supports at most {max_nodes} nodes, got {n}")
    forced = sum(1 << v for v in range(n) if x.node_labels[v] == 1)
    free = [v for v in range(n) if x.node_labels[v] == STAR]
    fixed = np.flatnonzero(x.interaction_labels != STAR)
    want = x.interaction_labels[fixed] == 1
    total = 1 << len(free)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
        subsets = np.full(len(idx), forced, dtype=np.uint64)
        for j, v in enumerate(free):
            subsets |= ((idx >> np.uint64(j)) & np.uint64(1)) << np.uint64(v)
        if len(fixed) == 0:
            return True
        sep = _separated_table(instance, subsets)[:, fixed]
        if np.any(np.all(sep == want, axis=1)):
            return True
    return False


def brute_force_qubo(q: dict, n: int, max_vars: int = 20) -> tuple[float, tuple[int, ...]]:
    """Maximize sum over i<=j of q_ij x_i x_j over binary x (0-based indices).

    Among maximizers the lexicographically smallest vector x is returned.
    """
    if n > max_vars:
        raise InstanceTooLarge(f"brute_force_qubo supports at most {max_vars} variables, got {n}")
    terms = []
    for (i, j), val in q.items():
        i, j = min(i, j), max(i, j)
        if not (0 <= i < n and 0 <= j < n):
            raise PreconditionError("qubo index out of range")
        terms.append((i, j, float(val)))
    total = 1 << n
    scale = 1.0 + sum(abs(t[2]) for t in terms)
    tol = 1e-9 * scale
    s = np.arange(total, dtype=np.int64)
    # x_i is bit n-1-i so numeric order equals lexicographic order of x
    X = [((s >> (n - 1 - i)) & 1).astype(np.float64) for i in range(n)]
    vals = np.zeros(total)
    for i, j, val in terms:
        vals += val * (X[i] * X[j] if i != j else X[i])
    hi = float(vals.max()) if total else 0.0
    cands = np.flatnonzero(vals >= hi - tol).tolist()
    exact = []
    for c in cands:
        x = tuple(int((c >> (n - 1 - i)) & 1) for i in range(n))
        exact.append((math.fsum(val * x[i] * x[j] for i, j, val in terms), x))
    best = max(v for v, _ in exact)
    return best, min(x for v, x in exact if v == best)


def _bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for a in row:
            nxt.append(nxt[-1] + a)
        row = nxt
    return row[0]


def brute_force_lmp(instance: LmpInstance, max_work: int = 1 << 21) -> float:
    """Minimum lifted multicut cost over all decompositions of G into connected parts.

    Enumerates restricted-growth strings (set partitions filtered to connected
    blocks) or, when cheaper, all subsets of joined edges; both cover every
    decomposition.
    """
    n = instance.node_count
    m = instance.graph.edge_count
    bell = _bell(n)
    if min(bell, 1 << m) > max_work:
        raise InstanceTooLarge("brute_force_lmp: too many partitions and edge subsets")
    if bell <= (1 << m):
        return _lmp_by_partitions(instance)
    return _lmp_by_edge_subsets(instance)


def _lmp_by_partitions(instance: LmpInstance) -> float:
    n = instance.node_count
    adj = instance.graph.adjacency_lists()
    best = math.inf
    labels = [0] * n

    def connected_blocks(k: int) -> bool:
        for b in range(k):
            members = [v for v in range(n) if labels[v] == b]
            seen = {members[0]}
            stack = [members[0]]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if labels[y] == b and y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(members):
                return False
        return True

    def rec(i: int, k: int) -> None:
        nonlocal best
        if i == n:
            if connected_blocks(k):
                best = min(best, lmp_objective(instance, np.array(labels)))
            return
        for b in range(k + 1):
            labels[i] = b
            rec(i + 1, max(k, b + 1))

    if n == 0:
        return 0.0
    labels[0] = 0
    rec(1, 1)
    return best


def _lmp_by_edge_subsets(instance: LmpInstance) -> float:
    n = instance.node_count
    e = instance.graph.edges()
    m = len(e)
    total = 1 << m
    best = math.inf
    best_labels = None
    for start in range(0, total, _CHUNK):
        s = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        lab = np.tile(np.arange(n, dtype=np.int16), (len(s), 1))
        joined = [((s >> k) & 1).astype(bool) for k in range(m)]
        while True:
            changed = False
            for k in range(m):
                a, b = e[k]
                j = joined[k]
                la, lb = lab[j, a], lab[j, b]
                mn = np.minimum(la, lb)
                if np.any(la != lb):
                    changed = True
                    lab[j, a] = mn
                    lab[j, b] = mn
            if not changed:
                break
        cut_e = lab[:, e[:, 0]] != lab[:, e[:, 1]]
        cut_l = lab[:, instance.lu] != lab[:, instance.lv]
        vals = cut_e.astype(np.float64) @ instance.edge_costs + cut_l.astype(np.float64) @ instance.lc
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_labels = lab[i].copy()
    # exact re-evaluation of the winning decomposition
    return lmp_objective(instance, best_labels) if best_labels is not None else 0.0
