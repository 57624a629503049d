# SPDX-License-Identifier: AGPL-3.0-only
import itertools
import math

import numpy as np
import pytest

import unfold.metrics as metrics
from unfold.errors import (
    DegenerateGeometry,
    DegenerateLayout,
    DimensionMismatch,
    NoIncidentPairs,
)
from unfold.generators import gen_grid
from unfold.graph import Graph

from conftest import complete, path_graph, star

X_GRAPH = Graph.from_edges(4, [(0, 1), (2, 3)])


def grid_coords(rows, cols):
    return [(c, -r) for r in range(rows) for c in range(cols)]


def rotate(X, theta, scale=1.0, shift=(0.0, 0.0)):
    R = np.array([[math.cos(theta), -math.sin(theta)],
                  [math.sin(theta), math.cos(theta)]])
    return scale * np.asarray(X, dtype=float) @ R.T + np.asarray(shift)


def naive_crossings(g, X):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    count = 0
    for e, f in itertools.combinations(g.edges, 2):
        if {e.u, e.v} & {f.u, f.v}:
            continue
        p1, q1, p2, q2 = X[e.u], X[e.v], X[f.u], X[f.v]
        if (orient(p1, q1, p2) * orient(p1, q1, q2) < 0
                and orient(p2, q2, p1) * orient(p2, q2, q1) < 0):
            count += 1
    return count


def test_single_crossing():
    X = [(0, 0), (1, 1), (0, 1), (1, 0)]
    assert metrics.crossing_pairs(X_GRAPH, X) == [(0, 1)]
    assert metrics.crossing_resolution(X_GRAPH, X) == pytest.approx(1.0)


def test_shared_endpoint_never_crosses():
    g = path_graph(3)
    assert metrics.count_crossings(g, [(0, 0), (1, 0), (0.5, 0)]) == 0


def test_grid_is_planar():
    g = gen_grid(5, 6)
    assert metrics.count_crossings(g, grid_coords(5, 6)) == 0
    assert metrics.crossing_resolution(g, grid_coords(5, 6)) is None


def test_k4_positions():
    k4 = complete(4)
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert metrics.count_crossings(k4, square) == 1
    centered = [(0, 0), (4, 0), (2, 3), (2, 1)]
    assert metrics.count_crossings(k4, centered) == 0


def test_overlapping_collinear_edges():
    with pytest.raises(DegenerateGeometry):
        metrics.count_crossings(X_GRAPH, [(0, 0), (2, 0), (1, 0), (3, 0)])
    disjoint = [(0, 0), (1, 0), (2, 0), (3, 0)]
    assert metrics.count_crossings(X_GRAPH, disjoint) == 0


def test_touching_is_not_crossing():
    # the second edge ends on the first one's interior
    assert metrics.count_crossings(X_GRAPH,
                                   [(0, 0), (2, 0), (1, 0), (1, 1)]) == 0


@pytest.mark.parametrize("seed", range(10))
def test_matches_naive_count(seed):
    rng = np.random.default_rng(seed)
    g = Graph.from_edges(12, [p for p in itertools.combinations(range(12), 2)
                              if rng.random() < 0.25])
    X = rng.random((12, 2))
    assert metrics.count_crossings(g, X) == naive_crossings(g, X)


def test_crossings_survive_similarity():
    rng = np.random.default_rng(4)
    g = complete(7)
    X = rng.random((7, 2))
    count = metrics.count_crossings(g, X)
    assert metrics.count_crossings(g, rotate(X, 0.7, 3.5, (10, -4))) == count


@pytest.mark.parametrize("mirror", [False, True])
def test_resolutions_survive_similarity(mirror):
    rng = np.random.default_rng(6)
    # K7 is not planar, so every drawing has a crossing
    g = complete(7)
    X = rng.random((7, 2))
    Y = rotate(X, 2.1, 0.3, (-5, 8))
    if mirror:
        Y = Y * [-1, 1]
    assert metrics.angular_resolution(g, Y) == \
        pytest.approx(metrics.angular_resolution(g, X), rel=1e-7)
    assert metrics.crossing_resolution(g, Y) == \
        pytest.approx(metrics.crossing_resolution(g, X), rel=1e-7)


def test_crossing_resolution_of_shallow_crossing():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    X = [(0, 0), (2, 0), (1 - c, -s), (1 + c, s)]
    assert metrics.crossing_resolution(X_GRAPH, X) == pytest.approx(1 / 3)


def test_angular_resolution():
    leaves = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)]
    assert metrics.angular_resolution(star(4), leaves) == pytest.approx(1.0)
    bent = [(0, 0), (1, 0), (1, 1)]
    assert metrics.angular_resolution(path_graph(3), bent) == \
        pytest.approx(0.5)
    straight = [(0, 0), (1, 0), (2, 0)]
    assert metrics.angular_resolution(path_graph(3), straight) == \
        pytest.approx(1.0)
    with pytest.raises(NoIncidentPairs):
        metrics.angular_resolution(path_graph(2), [(0, 0), (1, 0)])


def test_angular_resolution_uses_max_degree():
    # a degree-2 vertex with a 90 degree gap, max degree 4
    g = Graph.from_edges(7, [(0, 1), (0, 2), (0, 3), (0, 4), (5, 1), (5, 6)])
    X = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (2, 0), (2, 1)]
    assert metrics.angular_resolution(g, X) == pytest.approx(1.0)


def test_procrustes_similarity_is_zero():
    rng = np.random.default_rng(0)
    X = rng.random((20, 2))
    Y = rotate(X, 1.1, 0.3, (5, 5))
    assert metrics.procrustes_statistic(X, Y) == pytest.approx(0, abs=1e-9)
    mirrored = np.asarray(X) * [-1, 1]
    assert metrics.procrustes_statistic(X, mirrored) == \
        pytest.approx(0, abs=1e-9)


def test_procrustes_is_symmetric_and_bounded():
    rng = np.random.default_rng(1)
    X, Y = rng.random((15, 2)), rng.random((15, 2))
    a = metrics.procrustes_statistic(X, Y)
    assert a == pytest.approx(metrics.procrustes_statistic(Y, X))
    assert 0 < a <= 1


def _brute_force_procrustes(X, Y, steps=7200):
    X0 = X - X.mean(axis=0)
    Y0 = Y - Y.mean(axis=0)
    best = 0.0
    for flip in (1, -1):
        Yf = Y0 * [1, flip]
        for theta in np.linspace(0, 2 * math.pi, steps, endpoint=False):
            best = max(best, float((X0 * rotate(Yf, theta)).sum()))
    return 1 - best * best / ((X0 ** 2).sum() * (Y0 ** 2).sum())


@pytest.mark.parametrize("seed", range(3))
def test_procrustes_matches_angle_search(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.random((10, 2)), rng.random((10, 2))
    assert metrics.procrustes_statistic(X, Y) == \
        pytest.approx(_brute_force_procrustes(X, Y), abs=1e-4)


def test_procrustes_errors():
    with pytest.raises(DimensionMismatch):
        metrics.procrustes_statistic(np.zeros((3, 2)), np.zeros((4, 2)))
    with pytest.raises(DegenerateLayout):
        metrics.procrustes_statistic([(1, 1)] * 3, [(0, 0), (1, 0), (0, 1)])


def test_evaluate():
    g = complete(4)
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    report = metrics.evaluate(g, square, reference=square)
    assert report.nc == 1
    assert report.cros_res == pytest.approx(1.0)
    assert report.ps == pytest.approx(0.0, abs=1e-12)
    # 45 degrees at every corner against an ideal 120
    assert report.ang_res == pytest.approx(0.375)
    assert set(report.as_row()) == {"nc", "ang_res", "cros_res", "ps"}


def test_evaluate_without_reference():
    report = metrics.evaluate(path_graph(2), [(0, 0), (1, 0)])
    assert report.nc == 0
    assert report.ang_res is None
    assert report.cros_res is None
    assert report.ps is None
