# SPDX-License-Identifier: AGPL-3.0-only
"""
Edge footprints: the lengths of a maximum set of internally vertex-disjoint
paths joining the endpoints of an edge once the edge itself is removed.

Vertex-disjointness is reduced to unit-capacity max-flow by splitting every
node ``x`` into ``in(x) = 2x`` and ``out(x) = 2x + 1`` joined by an internal
arc; the flow is found with Edmonds-Karp and decomposed shortest path first.
"""
import os
from collections import deque

import attr
from logbook import Logger

import unfold.util as uutil
from unfold.errors import EdgeNotFound, ParseError
from unfold.graph import canonical_pair

log = Logger("unfold.paths")


def node_in(x):
    return 2 * x


def node_out(x):
    return 2 * x + 1


def original(x):
    return x // 2


@attr.s(frozen=True, eq=False)
class FlowNetwork:
    """
    Directed network over split nodes. ``capacity`` maps ``(a, b)`` arcs to
    their capacity; ``residual_neighbors[x]`` lists, sorted, every node
    sharing an arc with ``x`` in either direction.
    """
    size = attr.ib()
    source = attr.ib()
    sink = attr.ib()
    capacity = attr.ib(repr=False)
    residual_neighbors = attr.ib(repr=False)

    @property
    def arc_count(self):
        return len(self.capacity)


def build_split_network(g, e):
    u, v = e.pair if hasattr(e, "pair") else canonical_pair(*e)
    if not g.has_edge(u, v):
        raise EdgeNotFound(f"edge {(u, v)} not in graph")
    capacity = {}
    for x in range(g.n):
        c = 1
        if x in (u, v):
            # terminals are shared by every path
            c = max(g.degree(x) - 1, 1)
        capacity[(node_in(x), node_out(x))] = c
    for f in g.edges:
        if f.pair == (u, v):
            continue
        capacity[(node_out(f.u), node_in(f.v))] = 1
        capacity[(node_out(f.v), node_in(f.u))] = 1
    nbrs = [set() for _ in range(2 * g.n)]
    for a, b in capacity:
        nbrs[a].add(b)
        nbrs[b].add(a)
    return FlowNetwork(2 * g.n, node_out(u), node_in(v), capacity,
                       tuple(tuple(sorted(x)) for x in nbrs))


def _bfs_path(net, usable):
    parent = {net.source: None}
    queue = deque([net.source])
    while queue:
        x = queue.popleft()
        for y in net.residual_neighbors[x]:
            if y in parent or not usable(x, y):
                continue
            parent[y] = x
            if y == net.sink:
                path = [y]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(y)
    return None


def max_flow(net):
    "Edmonds-Karp; returns the flow on every arc of ``net``."
    flow = dict.fromkeys(net.capacity, 0)

    def residual(x, y):
        r = net.capacity.get((x, y), 0) - flow.get((x, y), 0)
        # the split network has no antiparallel arcs
        return r + flow.get((y, x), 0)

    while True:
        path = _bfs_path(net, lambda x, y: residual(x, y) > 0)
        if path is None:
            return flow
        hops = list(zip(path, path[1:]))
        delta = min(residual(x, y) for x, y in hops)
        for x, y in hops:
            if (y, x) in flow and flow[(y, x)] > 0:
                cancel = min(delta, flow[(y, x)])
                flow[(y, x)] -= cancel
                if delta > cancel:
                    flow[(x, y)] += delta - cancel
            else:
                flow[(x, y)] += delta


def max_flow_paths(net):
    """
    Returns the decomposition of a maximum flow into source-sink paths, each
    given as its sequence of original node ids.
    """
    flow = max_flow(net)
    paths = []
    while True:
        path = _bfs_path(net, lambda x, y: flow.get((x, y), 0) > 0)
        if path is None:
            break
        for x, y in zip(path, path[1:]):
            flow[(x, y)] -= 1
        nodes = [original(path[0])]
        for x in path[1:]:
            if original(x) != nodes[-1]:
                nodes.append(original(x))
        paths.append(nodes)
    return paths


def max_flow_value(g, e):
    return len(max_flow_paths(build_split_network(g, e)))


@attr.s(frozen=True)
class Footprint:
    edge = attr.ib()
    lengths = attr.ib(converter=lambda x: tuple(sorted(x)))

    def __len__(self):
        return len(self.lengths)

    @property
    def bridge(self):
        return not self.lengths


def footprint(g, e):
    net = build_split_network(g, e)
    pair = (original(net.source), original(net.sink))
    return Footprint(canonical_pair(*pair),
                     [len(p) - 1 for p in max_flow_paths(net)])


def all_footprints(g, jobs=1):
    """
    Maps every edge pair of ``g`` to its footprint. With ``jobs > 1`` edges
    are spread over a worker pool.
    """
    pairs = [e.pair for e in g.edges]
    result = uutil.run_parallel(_EdgeFootprint(g), pairs, jobs=jobs)
    log.debug("computed {} footprints on n={}", len(result), g.n)
    return {f.edge: f for f in result}


@attr.s(frozen=True)
class _EdgeFootprint:
    g = attr.ib()

    def __call__(self, pair):
        return footprint(self.g, pair)


def format_footprint_dump(footprints):
    lines = []
    for pair in sorted(footprints):
        ls = " ".join(str(x) for x in footprints[pair].lengths)
        lines.append(f"{pair[0]} {pair[1]} : {ls}".rstrip())
    return "\n".join(lines) + "\n"


def write_footprint_dump(footprints, fpath):
    uutil.write_atomic(fpath, format_footprint_dump(footprints))


def parse_footprint_dump(text, filename=None):
    result = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        try:
            if not sep:
                raise ValueError(line)
            u, v = (int(x) for x in head.split())
            lengths = [int(x) for x in tail.split()]
        except ValueError:
            raise ParseError(f"bad footprint line {line!r}",
                             lineno, filename) from None
        pair = canonical_pair(u, v)
        result[pair] = Footprint(pair, lengths)
    return result


def read_footprint_dump(fpath):
    with open(fpath, "r") as f:
        return parse_footprint_dump(f.read(), filename=os.fspath(fpath))
