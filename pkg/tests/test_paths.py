# SPDX-License-Identifier: AGPL-3.0-only
import itertools

import numpy as np
import pytest

from unfold.errors import EdgeNotFound, ParseError
from unfold.generators import augment, gen_grid
from unfold.graph import Edge, Graph, remove_edge_view
from unfold.paths import (
    Footprint,
    all_footprints,
    build_split_network,
    footprint,
    max_flow_paths,
    max_flow_value,
    parse_footprint_dump,
    read_footprint_dump,
    write_footprint_dump,
)

from conftest import cycle, path_graph


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2)
             if rng.random() < p]
    return Graph.from_edges(n, edges)


def simple_paths(g, u, v):
    out = []

    def walk(x, seen, trail):
        if x == v:
            out.append(trail)
            return
        for y in g.neighbors(x):
            if y not in seen:
                walk(y, seen | {y}, trail + [y])
    walk(u, {u}, [u])
    return out


def brute_force_disjoint(g, e):
    "Largest number of internally disjoint paths, by exhaustive search."
    h = remove_edge_view(g, e)
    paths = [set(p[1:-1]) for p in simple_paths(h, e.u, e.v)]
    best = 0

    def search(i, used, count):
        nonlocal best
        best = max(best, count)
        if count + len(paths) - i <= best:
            return
        for j in range(i, len(paths)):
            if not paths[j] & used:
                search(j + 1, used | paths[j], count + 1)
    search(0, set(), 0)
    return best


def test_triangle(triangle):
    net = build_split_network(triangle, Edge(0, 1))
    assert net.arc_count == 2 * (triangle.m - 1) + triangle.n
    assert max_flow_value(triangle, Edge(0, 1)) == 1
    assert footprint(triangle, Edge(0, 1)).lengths == (2,)


def test_k4(k4):
    assert max_flow_value(k4, (0, 1)) == 2
    for f in all_footprints(k4).values():
        assert f.lengths == (2, 2)


def test_cycles():
    assert footprint(cycle(5), (0, 1)).lengths == (4,)
    assert {f.lengths for f in all_footprints(cycle(6)).values()} == {(5,)}


def test_bridge_has_empty_footprint():
    f = footprint(path_graph(4), (1, 2))
    assert f.lengths == ()
    assert f.bridge


def test_missing_edge():
    with pytest.raises(EdgeNotFound):
        build_split_network(path_graph(3), (0, 2))


@pytest.mark.parametrize("seed", range(20))
def test_arc_count(seed):
    g = random_graph(12, 0.3, seed)
    if not g.m:
        return
    net = build_split_network(g, g.edges[0])
    assert net.arc_count == 2 * (g.m - 1) + g.n


@pytest.mark.parametrize("seed", range(15))
def test_matches_exhaustive_search(seed):
    g = random_graph(7, 0.5, seed)
    for e in g.edges:
        paths = max_flow_paths(build_split_network(g, e))
        assert len(paths) == brute_force_disjoint(g, e)
        inner = [x for p in paths for x in p[1:-1]]
        assert len(inner) == len(set(inner))
        for p in paths:
            assert (p[0], p[-1]) == e.pair
            assert len(p) - 1 >= 2
            assert all(g.has_edge(a, b) for a, b in zip(p, p[1:]))
        assert sum(len(p) - 1 for p in paths) <= g.m - 1


def test_grid_edge_footprint():
    g = gen_grid(5, 5)
    # an inner edge: two 3-paths around the unit squares on either side
    f = footprint(g, (6, 7))
    assert f.lengths[:2] == (3, 3)
    assert len(f) == 3


def test_figure_footprints(figure_grid, ab_edge, cd_edge):
    assert footprint(figure_grid, cd_edge).lengths == (2, 2, 6, 6)
    assert footprint(figure_grid, ab_edge).lengths == (7, 8, 8, 12)


def test_footprint_size_bounded_by_degree():
    g = augment(gen_grid(8, 8), 0.1, 5)
    footprints = all_footprints(g)
    assert set(footprints) == {e.pair for e in g.edges}
    for e in g.edges:
        f = footprints[e.pair]
        assert len(f) <= min(g.degree(e.u), g.degree(e.v)) - 1
        assert min(f.lengths) >= 2


def test_footprints_are_deterministic(figure_grid):
    assert all_footprints(figure_grid) == all_footprints(figure_grid)
    assert all_footprints(figure_grid, jobs=2) == all_footprints(figure_grid)


def test_dump_roundtrip(tmp_path, k4):
    footprints = all_footprints(k4)
    fpath = tmp_path / "k4.footprints"
    write_footprint_dump(footprints, fpath)
    assert fpath.read_text().splitlines()[0] == "0 1 : 2 2"
    assert read_footprint_dump(fpath) == footprints


def test_dump_parsing():
    parsed = parse_footprint_dump("3 1 : 2 5\n0 4 :\n")
    assert parsed[(1, 3)] == Footprint((1, 3), [5, 2])
    assert parsed[(0, 4)].bridge
    with pytest.raises(ParseError):
        parse_footprint_dump("0 1 2 3\n")
