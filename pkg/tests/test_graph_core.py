import itertools

import numpy as np
import pytest

from msep.errors import PreconditionError
from msep.graph_core import OPS, Graph, components, grid3, is_separated

from conftest import path_graph, random_connected_graph


def test_graph_rejects_self_loops_and_duplicates():
    with pytest.raises(PreconditionError):
        Graph(3, [(0, 0)])
    with pytest.raises(PreconditionError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(PreconditionError):
        Graph(2, [(0, 2)])


def test_adjacency_is_sorted_and_symmetric(rng):
    g = random_connected_graph(rng, 10, 0.4)
    adj = g.adjacency_lists()
    for v in range(10):
        assert adj[v] == sorted(adj[v])
        for w in adj[v]:
            assert v in adj[w]
            assert g.has_edge(v, w) and g.has_edge(w, v)
    assert sum(len(a) for a in adj) == 2 * g.edge_count


def test_components_path_middle_removed():
    lab = components(path_graph(3), {1})
    assert lab.tolist() == [0, -1, 1]


def test_components_connected_graph_single_label(rng):
    g = random_connected_graph(rng, 9)
    assert components(g).tolist() == [0] * 9


def test_components_grid_center_column():
    g = grid3(3, 3, 1)
    removed = {g.node_id(1, y, 0) for y in range(3)}
    lab = components(g, removed)
    kept = lab[lab >= 0]
    assert sorted(np.bincount(kept).tolist()) == [3, 3]


def test_components_labels_follow_lowest_id():
    g = Graph(6, [(4, 5), (2, 3), (0, 1)])
    assert components(g).tolist() == [0, 0, 1, 1, 2, 2]
    g = Graph(5, [(0, 4), (1, 2)])
    assert components(g).tolist() == [0, 1, 1, 2, 0]


def test_components_accepts_mask_and_set():
    g = path_graph(5)
    mask = np.array([False, False, True, False, False])
    assert components(g, mask).tolist() == components(g, {2}).tolist()


def _reachable_by_paths(g, S, u, v):
    """Exhaustive simple-path enumeration avoiding S."""
    adj = g.adjacency_lists()

    def dfs(x, seen):
        if x == v:
            return True
        return any(dfs(w, seen | {w}) for w in adj[x] if w not in seen and w not in S)

    return u not in S and v not in S and dfs(u, {u})


def test_is_separated_matches_path_enumeration(rng):
    for _ in range(60):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(rng, n, 0.25)
        S = {v for v in range(n) if rng.random() < 0.3}
        for u, v in itertools.combinations(range(n), 2):
            assert is_separated(g, S, u, v) == (not _reachable_by_paths(g, S, u, v))


def test_is_separated_examples():
    assert is_separated(path_graph(3), {1}, 0, 2)
    assert not is_separated(path_graph(2), set(), 0, 1)
    with pytest.raises(PreconditionError):
        is_separated(path_graph(2), set(), 1, 1)


@pytest.mark.parametrize(
    "dims,nodes,edges",
    [((2, 1, 1), 2, 1), ((2, 2, 2), 8, 12), ((64, 64, 64), 262144, 774144), ((3, 4, 5), 60, 133)],
)
def test_grid3_counts(dims, nodes, edges):
    g = grid3(*dims)
    nx, ny, nz = dims
    assert g.node_count == nodes
    assert g.edge_count == edges == 3 * nx * ny * nz - ny * nz - nx * nz - nx * ny


def test_grid3_rejects_zero_dimension():
    with pytest.raises(PreconditionError):
        grid3(0, 2, 2)


def test_grid3_linearization_and_6_connectivity():
    g = grid3(3, 4, 2)
    assert g.node_id(1, 0, 0) == 1 and g.node_id(0, 1, 0) == 3 and g.node_id(0, 0, 1) == 12
    for v in range(g.node_count):
        assert g.node_id(*g.coords(v)) == v
    for u, v in itertools.combinations(range(g.node_count), 2):
        d = sum(abs(a - b) for a, b in zip(g.coords(u), g.coords(v)))
        assert g.has_edge(u, v) == (d == 1)
    assert components(g).max() == 0


def test_components_counts_operations():
    g = grid3(4, 4, 4)
    OPS.reset()
    components(g)
    first = OPS.count
    components(g)
    assert first > 0 and OPS.count == 2 * first
