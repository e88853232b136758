import itertools

import numpy as np
import pytest

from msep.graph_core import Graph, grid3
from msep.msp_core import MspInstance


def path_graph(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def chain_instance():
    """Path a-b-c-d with node costs 6,4,3,2, edge interactions 1,1,7 and a long-range a-d of -8."""
    return MspInstance(path_graph(4), [(0, 1, 1), (1, 2, 1), (2, 3, 7), (0, 3, -8)], [6, 4, 3, 2])


def grid_a_instance():
    """3x3 grid, nodes numbered row by row."""
    inter = [(0, 2, 1), (0, 3, 1), (2, 3, 3), (3, 7, -2), (7, 8, 2)]
    return MspInstance(grid3(3, 3, 1), inter, [4, -2, 3, 1, 1, -1, -2, 5, -1])


def grid_b_instance():
    inter = [(0, 2, 1), (0, 3, 1), (2, 3, 3), (4, 5, 1), (4, 7, -4), (7, 8, 2)]
    return MspInstance(grid3(3, 3, 1), inter, [4, -2, 3, 1, 1, -4, -1, 5, -1])


def random_connected_graph(rng, n, extra=0.3):
    """Random spanning tree plus each remaining pair with probability `extra`."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.add((u, v))
    for u, v in itertools.combinations(range(n), 2):
        if (u, v) not in edges and rng.random() < extra:
            edges.add((u, v))
    return Graph(n, sorted(edges))


def random_instance(rng, n, n_inter, integer=True, lo=-5, hi=5, graph=None):
    g = graph if graph is not None else random_connected_graph(rng, n)
    pairs = list(itertools.combinations(range(n), 2))
    k = min(n_inter, len(pairs))
    chosen = rng.choice(len(pairs), size=k, replace=False) if k else []
    draw = (lambda: float(rng.integers(lo, hi + 1))) if integer else (lambda: float(rng.uniform(lo, hi)))
    inter = [(pairs[i][0], pairs[i][1], draw()) for i in chosen]
    return MspInstance(g, inter, [draw() for _ in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain():
    return chain_instance()


@pytest.fixture
def grid_a():
    return grid_a_instance()


@pytest.fixture
def grid_b():
    return grid_b_instance()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
