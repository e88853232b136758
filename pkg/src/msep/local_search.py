"""Greedy local search: separator shrinking (GSS) and separator growing (GSG).

Both solvers keep potentials in a versioned priority queue. A potential is
the change of the objective caused by toggling one node's membership.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph_core import _removed_mask, components
from .msp_core import MspInstance, objective

__all__ = [
    "VersionedQueue",
    "SolverResult",
    "insertion_delta",
    "greedy_potential",
    "gss",
    "gsg",
]


class VersionedQueue:
    """Min-heap of (priority, node, version); stale entries are skipped on pop.

    Equal priorities pop the lowest node id first.
    """

    def __init__(self, n: int):
        self._heap: list[tuple[float, int, int]] = []
        self._version = [0] * n
        self._live = [False] * n

    def push(self, node: int, priority: float) -> None:
        ver = self._version[node] + 1
        self._version[node] = ver
        self._live[node] = True
        heapq.heappush(self._heap, (priority, node, ver))

    def discard(self, node: int) -> None:
        self._version[node] += 1
        self._live[node] = False

    def _clean(self) -> None:
        h = self._heap
        ver = self._version
        live = self._live
        while h and (not live[h[0][1]] or h[0][2] != ver[h[0][1]]):
            heapq.heappop(h)

    def pop(self):
        """Return (priority, node) of a current minimum, or None when empty."""
        self._clean()
        if not self._heap:
            return None
        p, v, _ = heapq.heappop(self._heap)
        self._live[v] = False
        return p, v

    def peek_priority(self):
        self._clean()
        return self._heap[0][0] if self._heap else None

    def __bool__(self) -> bool:
        self._clean()
        return bool(self._heap)


@dataclass
class SolverResult:
    mask: np.ndarray
    objective: float
    initial_objective: float
    trace: list
    moves: list
    iterations: int
    events: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    ops: int = 0

    @property
    def separator(self) -> frozenset:
        return frozenset(np.flatnonzero(self.mask).tolist())


def insertion_delta(instance: MspInstance, S, v: int) -> float:
    """Objective change of adding v to S, from one components() call on V minus (S and v)."""
    n = instance.node_count
    mask = _removed_mask(n, S)
    if mask[v]:
        raise PreconditionError("v is already in the separator")
    mask = mask.copy()
    mask[v] = True
    lab = components(instance.graph, mask)
    mask[v] = False
    near = {int(lab[w]) for w in instance.graph.neighbors(v) if not mask[w]}
    total = [float(instance.node_costs[v])]
    for a, b, c in zip(instance.iu.tolist(), instance.iv.tolist(), instance.ic.tolist()):
        if mask[a] or mask[b]:
            continue
        if a == v or b == v:
            other = b if a == v else a
            if lab[other] in near:
                total.append(c)
        elif lab[a] != lab[b] and lab[a] in near and lab[b] in near:
            total.append(c)
    return math.fsum(total)


def greedy_potential(instance: MspInstance, S, v: int) -> float:
    """insertion_delta(S, v) for v outside S, minus the insertion delta of v into S without v otherwise."""
    mask = _removed_mask(instance.node_count, S)
    if not mask[v]:
        return insertion_delta(instance, mask, v)
    mask = mask.copy()
    mask[v] = False
    return -insertion_delta(instance, mask, v)


def _initial_mask(n: int, initial) -> np.ndarray:
    if initial is None:
        return np.ones(n, dtype=bool)
    return _removed_mask(n, initial).copy()


def gss(instance: MspInstance, initial=None, stop_at_zero: bool = False, check: bool = False) -> SolverResult:
    """Greedy separator shrinking.

    Starts from `initial` (default: all nodes) and repeatedly removes the
    separator node of minimum potential, contracting it with the adjacent
    non-separator components. Stops once the minimum potential is > 0
    (>= 0 with stop_at_zero). With check=True every move is verified
    against a full objective evaluation.
    """
    g = instance.graph
    n = g.node_count
    adj = g.adjacency_lists()
    nc = instance.node_costs.tolist()
    in_sep_mask = _initial_mask(n, initial)
    in_sep = in_sep_mask.tolist()
    parent = list(range(n))

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    boundary: dict[int, set] = {}
    if all(in_sep):
        cur = list(range(n))
    else:
        lab = components(g, in_sep_mask).tolist()
        first: dict[int, int] = {}
        for x in range(n):
            if lab[x] >= 0:
                r = first.setdefault(lab[x], x)
                parent[x] = r
        cur = [x if in_sep[x] else parent[x] for x in range(n)]
        for s in range(n):
            if in_sep[s]:
                for w in adj[s]:
                    if not in_sep[w]:
                        boundary.setdefault(cur[w], set()).add(s)
        for r in set(first.values()):
            boundary.setdefault(r, set())

    I: list[dict] = [dict() for _ in range(n)]
    for a, b, c in zip(instance.iu.tolist(), instance.iv.tolist(), instance.ic.tolist()):
        ra, rb = cur[a], cur[b]
        if ra == rb:
            continue
        val = I[ra].get(rb, 0.0) + c
        I[ra][rb] = val
        I[rb][ra] = val

    def potential(u: int) -> float:
        comps: list[int] = []
        for w in adj[u]:
            if not in_sep[w]:
                r = find(w)
                if r not in comps:
                    comps.append(r)
        s = nc[u]
        Iu = I[u]
        for r in comps:
            s += Iu.get(r, 0.0)
        for i in range(len(comps) - 1):
            Ii = I[comps[i]]
            for j in range(i + 1, len(comps)):
                s += Ii.get(comps[j], 0.0)
        return -s

    queue = VersionedQueue(n)
    pot = [0.0] * n
    for u in range(n):
        if in_sep[u]:
            pot[u] = potential(u)
            queue.push(u, pot[u])

    obj = objective(instance, in_sep_mask) if initial is not None else math.fsum(nc + instance.ic.tolist())
    init_obj = obj
    trace = [obj]
    moves: list[int] = []
    iterations = 0
    ops = 0
    while True:
        item = queue.pop()
        if item is None:
            break
        p, v = item
        iterations += 1
        if p > 0 or (stop_at_zero and p >= 0):
            break
        parts: list[int] = []
        sepnb: list[int] = []
        for w in adj[v]:
            if in_sep[w]:
                sepnb.append(w)
            else:
                r = find(w)
                if r not in parts:
                    parts.append(r)
        if parts:
            R = max(parts, key=lambda r: len(I[r]) + len(boundary[r]))
        else:
            R = v
        members = parts + [v]
        cset = set(members)
        small = [x for x in members if x != R]

        # separator nodes whose potential may change
        cand = set(sepnb)
        for X in small:
            if X != v:
                cand |= boundary[X]
        bR = boundary.get(R) if R != v else None
        for X in small:
            for Y in I[X]:
                if Y in cset:
                    continue
                if in_sep[Y]:
                    cand.add(Y)
                elif bR:
                    cand |= boundary[Y] & bR
            ops += len(I[X])

        # contract
        in_sep[v] = False
        IR = I[R]
        for X in small:
            parent[X] = R
            IX = I[X]
            for Y, c in IX.items():
                if Y in cset:
                    continue
                IY = I[Y]
                del IY[X]
                val = IR.get(Y, 0.0) + c
                IR[Y] = val
                IY[R] = val
            if X is not R:
                I[X] = {}
        for X in small:
            IR.pop(X, None)
        if R == v:
            B = set(sepnb)
        else:
            B = boundary[R]
            for X in small:
                if X != v:
                    B |= boundary.pop(X)
            B.update(sepnb)
            B.discard(v)
        boundary[R] = B

        obj += p
        moves.append(v)
        trace.append(obj)

        for u in cand:
            if u == v or not in_sep[u] or u not in B:
                continue
            ops += len(adj[u])
            q = potential(u)
            if q != pot[u]:
                pot[u] = q
                queue.push(u, q)

        if check:
            mask = np.array(in_sep, dtype=bool)
            exact = objective(instance, mask)
            if not math.isclose(exact, obj, rel_tol=1e-9, abs_tol=1e-9):
                raise AssertionError(f"state objective {obj} differs from recomputed {exact}")

    return SolverResult(
        mask=np.array(in_sep, dtype=bool),
        objective=obj,
        initial_objective=init_obj,
        trace=trace,
        moves=moves,
        iterations=iterations,
        ops=ops,
        metadata={"algorithm": "gss"},
    )


def gsg(instance: MspInstance) -> SolverResult:
    """Greedy separator growing.

    Starts from the empty separator and inserts the node of minimum cached
    potential after recomputing its exact insertion cost. Cached potentials
    are lowered whenever an interaction they counted gets separated.
    """
    g = instance.graph
    n = g.node_count
    adj = g.adjacency_lists()
    nc = instance.node_costs.tolist()
    fu = instance.iu.tolist()
    fv = instance.iv.tolist()
    fc = instance.ic.tolist()
    m = len(fu)
    inc: list[list[int]] = [[] for _ in range(n)]
    for k in range(m):
        inc[fu[k]].append(k)
        inc[fv[k]].append(k)
    alive = [True] * n
    falive = [True] * m
    cn: list[list[int]] = [[fu[k], fv[k]] for k in range(m)]
    p = [0.0] * n
    queue = VersionedQueue(n)
    for v in range(n):
        s = nc[v]
        for k in inc[v]:
            s += fc[k]
        p[v] = s
        queue.push(v, s)

    counter = [0]

    def separated_by(v: int) -> list[int]:
        """Live interactions separated by deleting v from the surviving graph."""
        result = {k for k in inc[v] if falive[k]}
        nb = [w for w in adj[v] if alive[w]]
        if len(nb) <= 1:
            return sorted(result)
        k = len(nb)
        owner = {}
        gp = list(range(k))
        queues = []
        members = []
        for i, w in enumerate(nb):
            owner[w] = i
            queues.append(deque([w]))
            members.append([w])

        def groot(i: int) -> int:
            while gp[i] != i:
                gp[i] = gp[gp[i]]
                i = gp[i]
            return i

        roots = k
        frontier = list(range(k))
        done: list[int] = []
        work = 0
        while roots > 1 and len(frontier) > 1:
            nxt = []
            for r in frontier:
                if gp[r] != r:
                    continue
                q = queues[r]
                if not q:
                    done.append(r)
                    continue
                x = q.popleft()
                work += 1
                for y in adj[x]:
                    work += 1
                    if y == v or not alive[y]:
                        continue
                    o = owner.get(y)
                    if o is None:
                        rr = groot(r)
                        owner[y] = rr
                        members[rr].append(y)
                        queues[rr].append(y)
                        continue
                    ra, rb = groot(r), groot(o)
                    if ra == rb:
                        continue
                    if len(members[ra]) < len(members[rb]):
                        ra, rb = rb, ra
                    gp[rb] = ra
                    members[ra].extend(members[rb])
                    queues[ra].extend(queues[rb])
                    members[rb] = []
                    queues[rb] = deque()
                    roots -= 1
                rr = groot(r)
                if queues[rr]:
                    nxt.append(rr)
                else:
                    done.append(rr)
            frontier = []
            seen = set()
            for r in nxt:
                r = groot(r)
                if r not in seen and queues[r]:
                    seen.add(r)
                    frontier.append(r)
            done = [d for d in done if gp[d] == d]
            if roots <= 1:
                break
        counter[0] += work
        if roots <= 1:
            return sorted(result)
        for d in set(done):
            if gp[d] != d:
                continue
            for x in members[d]:
                for f in inc[x]:
                    if not falive[f]:
                        continue
                    other = fv[f] if fu[f] == x else fu[f]
                    if other == v:
                        continue
                    o = owner.get(other)
                    if o is None or groot(o) != d:
                        result.add(f)
        return sorted(result)

    obj = 0.0
    trace = [obj]
    moves: list[int] = []
    events: list[dict] = []
    iterations = 0
    while True:
        item = queue.pop()
        if item is None:
            break
        pv, v = item
        iterations += 1
        if pv > 0:
            break
        sep = separated_by(v)
        newp = nc[v]
        for f in sep:
            newp += fc[f]
            if v not in cn[f]:
                cn[f].append(v)
        if newp != pv:
            events.append({"node": v, "cached": pv, "recomputed": newp})
        p[v] = newp
        top = queue.peek_priority()
        if newp > 0 or (top is not None and newp > top):
            queue.push(v, newp)
            continue
        alive[v] = False
        obj += newp
        moves.append(v)
        trace.append(obj)
        for f in sep:
            falive[f] = False
            c = fc[f]
            for u in cn[f]:
                if u != v and alive[u]:
                    p[u] -= c
                    queue.push(u, p[u])

    outside = ~instance.interaction_is_edge()
    meta = {"algorithm": "gsg"}
    if np.any(instance.ic[outside] < 0):
        meta["warning"] = "greedy exactness not guaranteed"
    return SolverResult(
        mask=~np.array(alive, dtype=bool),
        objective=obj,
        initial_objective=0.0,
        trace=trace,
        moves=moves,
        iterations=iterations,
        events=events,
        metadata=meta,
        ops=counter[0],
    )
