import itertools
import math

import numpy as np
import pytest

from msep.errors import PreconditionError
from msep.graph_core import Graph, components, grid3
from msep.local_search import VersionedQueue, greedy_potential, gsg, gss, insertion_delta
from msep.msp_core import MspInstance, objective, separated_interactions
from msep.oracle import brute_force_msp

from conftest import chain_instance, path_graph, random_instance


# ---------------------------------------------------------------- references


def naive_gss(inst, initial=None, stop_at_zero=False):
    """Greedy separator shrinking without contraction: potentials are plain objective differences."""
    n = inst.node_count
    S = set(range(n)) if initial is None else set(initial)
    trace, moves = [objective(inst, S)], []
    while S:
        p, u = min((objective(inst, S - {u}) - objective(inst, S), u) for u in S)
        if p > 0 or (stop_at_zero and p >= 0):
            break
        S.remove(u)
        moves.append(u)
        trace.append(objective(inst, S))
    return S, moves, trace


def naive_gsg(inst):
    """Greedy separator growing with cached potentials and cut-node lists; F^t({v}) from components()."""
    n = inst.node_count
    fu, fv, fc = inst.iu.tolist(), inst.iv.tolist(), inst.ic.tolist()
    alive = set(range(n))
    live = set(range(len(fu)))
    p = {v: inst.node_costs[v] + sum(fc[k] for k in range(len(fu)) if v in (fu[k], fv[k])) for v in range(n)}
    cn = {k: {fu[k], fv[k]} for k in live}
    obj, trace, moves, events = 0.0, [0.0], [], []
    while alive:
        pv, v = min((p[u], u) for u in alive)
        if pv > 0:
            break
        removed = [u for u in range(n) if u not in alive or u == v]
        lab = components(inst.graph, removed)
        sep = [k for k in sorted(live) if v in (fu[k], fv[k]) or lab[fu[k]] != lab[fv[k]]]
        for k in sep:
            cn[k].add(v)
        newp = inst.node_costs[v] + sum(fc[k] for k in sep)
        if newp != pv:
            events.append({"node": v, "cached": pv, "recomputed": newp})
        p[v] = newp
        others = [p[u] for u in alive if u != v]
        if newp > 0 or (others and newp > min(others)):
            continue
        alive.remove(v)
        obj += newp
        moves.append(v)
        trace.append(obj)
        for k in sep:
            live.discard(k)
            for u in cn[k]:
                if u != v and u in alive:
                    p[u] -= fc[k]
    return set(range(n)) - alive, moves, trace, events


def bidirectional_greedy(inst, max_steps=100):
    """Generic greedy over insertions and removals (test reference only)."""
    n = inst.node_count
    S = set(range(n))
    trace = [objective(inst, S)]
    for _ in range(max_steps):
        p, v = min((greedy_potential(inst, S, v), v) for v in range(n))
        if p >= 0:
            break
        S ^= {v}
        trace.append(objective(inst, S))
    return S, trace


# ---------------------------------------------------------------- queue


def test_versioned_queue_skips_stale_entries():
    q = VersionedQueue(4)
    q.push(0, 5.0)
    q.push(1, 3.0)
    q.push(2, 3.0)
    q.push(1, 7.0)
    q.discard(2)
    assert q.peek_priority() == 5.0
    assert q.pop() == (5.0, 0)
    assert q.pop() == (7.0, 1)
    assert q.pop() is None


def test_versioned_queue_ties_pop_lowest_id():
    q = VersionedQueue(5)
    for v in (4, 2, 3):
        q.push(v, 1.0)
    assert [q.pop()[1] for _ in range(3)] == [2, 3, 4]


# ---------------------------------------------------------------- potentials


def test_insertion_delta_examples(chain):
    assert insertion_delta(chain, set(), 1) == -2
    inst = MspInstance(path_graph(3), [(0, 2, 4.0)], [1.0, 2.0, 7.0])
    assert insertion_delta(inst, {0}, 2) == 7
    with pytest.raises(PreconditionError):
        insertion_delta(chain, {1}, 1)


def test_greedy_potential_chain(chain):
    full = set(range(4))
    assert [greedy_potential(chain, full, v) for v in range(4)] == [-6, -4, -3, -2]
    assert greedy_potential(chain, {1, 2, 3}, 1) == -5


def test_potentials_equal_objective_differences(rng):
    for _ in range(100):
        n = int(rng.integers(2, 10))
        inst = random_instance(rng, n, 8, integer=False)
        S = {v for v in range(n) if rng.random() < 0.5}
        for v in range(n):
            other = S ^ {v}
            assert greedy_potential(inst, S, v) == pytest.approx(objective(inst, other) - objective(inst, S), abs=1e-9)


# ---------------------------------------------------------------- GSS


def test_gss_chain_trace(chain):
    r = gss(chain, check=True)
    assert r.trace == [16, 10, 5, 1, 0]
    assert r.moves == [0, 1, 2, 3]
    assert r.separator == frozenset()


def test_bidirectional_greedy_reproduces_full_chain_trace(chain):
    S, trace = bidirectional_greedy(chain)
    assert trace == [16, 10, 5, 1, 0, -2]
    assert S == {1}


def test_gss_grid_a(grid_a):
    r = gss(grid_a, check=True)
    assert len(r.moves) == 6
    assert r.moves == [7, 0, 2, 3, 1, 8]
    assert r.trace == [13, 8, 4, 1, -1, -3, -4]
    assert sorted(r.separator) == [4, 5, 6]


def test_gss_without_interactions():
    costs = [2.0, 0.0, -1.0, 3.0, -0.5]
    inst = MspInstance(path_graph(5), [], costs)
    assert gss(inst).separator == {2, 4}
    assert gss(inst, stop_at_zero=True).separator == {1, 2, 4}
    neg = MspInstance(path_graph(3), [], [-1.0, -2.0, -3.0])
    r = gss(neg)
    assert r.separator == {0, 1, 2} and r.moves == []


def test_gss_initial_separator(chain):
    r = gss(chain, initial={1, 2, 3})
    assert r.initial_objective == objective(chain, {1, 2, 3})
    assert r.objective == objective(chain, r.mask)


def test_gss_matches_naive_reference(rng):
    for _ in range(200):
        n = int(rng.integers(1, 10))
        inst = random_instance(rng, n, int(rng.integers(0, 12)))
        zero = bool(rng.random() < 0.3)
        r = gss(inst, stop_at_zero=zero)
        S, moves, trace = naive_gss(inst, stop_at_zero=zero)
        assert r.moves == moves
        assert r.trace == trace
        assert r.separator == S


def test_gss_matches_naive_on_grids(rng):
    for _ in range(20):
        g = grid3(3, 3, 2)
        inst = random_instance(rng, g.node_count, 25, graph=g)
        r = gss(inst, check=True)
        S, moves, trace = naive_gss(inst)
        assert (r.moves, r.trace) == (moves, trace)


# ---------------------------------------------------------------- GSG


def test_gsg_grid_b(grid_b):
    r = gsg(grid_b)
    assert r.moves == [5, 4, 6]
    assert r.trace == [0, -3, -6, -7]
    assert sorted(r.separator) == [4, 5, 6]
    assert {"node": 1, "cached": -2.0, "recomputed": 2.0} in r.events
    assert r.objective == objective(grid_b, r.mask)
    assert "warning" not in r.metadata  # the only repulsive interaction is an edge


def test_gsg_flags_repulsive_long_range_interactions():
    inst = MspInstance(path_graph(3), [(0, 2, -1.0)], [1.0, 1.0, 1.0])
    assert gsg(inst).metadata["warning"] == "greedy exactness not guaranteed"


def test_gsg_all_attractive_is_empty():
    inst = MspInstance(path_graph(4), [(0, 2, 1.0), (1, 3, 2.0)], [1.0, 2.0, 3.0, 4.0])
    r = gsg(inst)
    assert r.separator == frozenset() and r.moves == [] and "warning" not in r.metadata


def test_gsg_path_with_repulsive_ends():
    inst = MspInstance(path_graph(3), [(0, 2, -5.0)], [0.0, 1.0, 0.0])
    r = gsg(inst)
    assert r.moves == [0, 2]
    assert r.objective == -5.0 == brute_force_msp(inst)[1]
    costly = MspInstance(path_graph(3), [(0, 2, -5.0)], [10.0, 1.0, 10.0])
    assert gsg(costly).separator == frozenset()
    assert brute_force_msp(costly) == (frozenset({1}), -4.0)


def test_gsg_matches_naive_reference(rng):
    for _ in range(200):
        n = int(rng.integers(1, 10))
        inst = random_instance(rng, n, int(rng.integers(0, 12)))
        r = gsg(inst)
        S, moves, trace, events = naive_gsg(inst)
        assert r.moves == moves
        assert r.trace == trace
        assert r.events == events
        assert r.separator == S


def test_gsg_matches_naive_on_grids(rng):
    for _ in range(20):
        g = grid3(4, 3, 2)
        inst = random_instance(rng, g.node_count, 30, graph=g)
        r = gsg(inst)
        S, moves, trace, events = naive_gsg(inst)
        assert (r.moves, r.trace, r.events) == (moves, trace, events)


# ---------------------------------------------------------------- shared properties


@pytest.mark.parametrize("solver", [gss, gsg])
def test_traces_are_exact_and_non_increasing(rng, solver):
    for _ in range(100):
        n = int(rng.integers(1, 12))
        inst = random_instance(rng, n, int(rng.integers(0, 12)))
        r = solver(inst)
        assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))
        assert r.trace[0] == r.initial_objective
        assert r.objective == r.trace[-1] == objective(inst, r.mask)
        start = set(range(n)) if solver is gss else set()
        S = set(start)
        for v, t in zip(r.moves, r.trace[1:]):
            S ^= {v}
            assert objective(inst, S) == t


@pytest.mark.parametrize("solver", [gss, gsg])
def test_solvers_never_beat_the_optimum(rng, solver):
    for _ in range(60):
        n = int(rng.integers(1, 11))
        inst = random_instance(rng, n, int(rng.integers(0, 10)), integer=False)
        assert solver(inst).objective >= brute_force_msp(inst)[1] - 1e-9


def test_gss_local_optimality(rng):
    for _ in range(60):
        n = int(rng.integers(1, 10))
        inst = random_instance(rng, n, 10, integer=False)
        r = gss(inst)
        assert all(greedy_potential(inst, r.separator, v) > 0 for v in r.separator)


def test_gsg_reports_work_on_grids():
    g = grid3(6, 6, 6)
    rng = np.random.default_rng(3)
    inst = MspInstance(g, [], rng.normal(size=g.node_count))
    r = gsg(inst)
    assert r.ops > 0 and r.iterations >= len(r.moves)
