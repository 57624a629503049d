# SPDX-License-Identifier: AGPL-3.0-only
import pytest

from unfold.generators import gen_grid
from unfold.graph import Edge, Graph, add_edge

FIG_ROWS = 12
FIG_COLS = 14


def grid_id(r, c, cols=FIG_COLS):
    return r * cols + c


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_edges(n, [(u, v) for u in range(n)
                                for v in range(u + 1, n)])


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@pytest.fixture
def triangle():
    return complete(3)


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def figure_grid():
    """
    A 12x14 grid with three augmenting edges: a = (2,2) to b = (6,6),
    c = (9,10) to d = (10,11), and u = (0,2) to w = (6,10).
    """
    g = gen_grid(FIG_ROWS, FIG_COLS)
    for p, q in [((2, 2), (6, 6)), ((9, 10), (10, 11)), ((0, 2), (6, 10))]:
        g = add_edge(g, grid_id(*p), grid_id(*q), aug=True)
    return g


@pytest.fixture
def ab_edge():
    return Edge(grid_id(2, 2), grid_id(6, 6))


@pytest.fixture
def cd_edge():
    return Edge(grid_id(9, 10), grid_id(10, 11))
