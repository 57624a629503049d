# SPDX-License-Identifier: AGPL-3.0-only
"""
Undirected weighted simple graphs over dense node ids ``0..n-1``.

Graphs are immutable: every mutating operation returns a new instance. Edges
are kept canonically (``u < v``) in insertion order, and the adjacency lists
are derived from the edge list, sorted by neighbour id.
"""
import math
from enum import Enum

import attr
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from unfold.errors import DuplicateEdge, EdgeNotFound, NodeOutOfRange, SelfLoop

DEFAULT_WEIGHT = 1.0


class DistanceMode(Enum):
    HOPS = "unweighted"
    WEIGHTED = "weighted"


def canonical_pair(u, v):
    return (u, v) if u < v else (v, u)


@attr.s(frozen=True, order=True)
class Edge:
    u = attr.ib()
    v = attr.ib()
    w = attr.ib(default=DEFAULT_WEIGHT, order=False)
    aug = attr.ib(default=False, order=False)

    @property
    def pair(self):
        return (self.u, self.v)


def _build_adjacency(n, edges):
    adj = [[] for _ in range(n)]
    for e in edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    return tuple(tuple(sorted(x)) for x in adj)


@attr.s(frozen=True, eq=False)
class Graph:
    n = attr.ib()
    edges = attr.ib(converter=tuple, factory=tuple)
    adjacency = attr.ib(init=False, repr=False)
    _index = attr.ib(init=False, repr=False)

    def __attrs_post_init__(self):
        # frozen instances need the object.__setattr__ escape hatch
        object.__setattr__(self, "adjacency",
                           _build_adjacency(self.n, self.edges))
        object.__setattr__(self, "_index",
                           {e.pair: i for i, e in enumerate(self.edges)})

    @classmethod
    def empty(cls, n):
        if n < 0:
            raise NodeOutOfRange(f"negative node count {n}")
        return cls(n)

    @classmethod
    def from_edges(cls, n, edges):
        """
        Builds a graph from ``(u, v[, w[, aug]])`` tuples or ``Edge`` objects,
        applying the same checks as ``add_edge``.
        """
        stored = []
        seen = set()
        for raw in edges:
            e = raw if isinstance(raw, Edge) else _edge_from_tuple(raw)
            e = _checked_edge(n, e.u, e.v, e.w, e.aug)
            if e.pair in seen:
                raise DuplicateEdge(f"edge {e.pair} already present")
            seen.add(e.pair)
            stored.append(e)
        return cls(n, stored)

    @property
    def m(self):
        return len(self.edges)

    def neighbors(self, x):
        return self.adjacency[x]

    def degree(self, x):
        return len(self.adjacency[x])

    def max_degree(self):
        return max((len(x) for x in self.adjacency), default=0)

    def has_edge(self, u, v):
        return canonical_pair(u, v) in self._index

    def edge(self, u, v):
        try:
            return self.edges[self._index[canonical_pair(u, v)]]
        except KeyError:
            raise EdgeNotFound(f"edge {canonical_pair(u, v)} not in graph") \
                from None

    def edge_weight(self, u, v):
        return self.edge(u, v).w

    def aug_edges(self):
        return [e for e in self.edges if e.aug]

    def with_weights(self, weights):
        return Graph(self.n, [
            attr.evolve(e, w=weights[e.pair]) if e.pair in weights else e
            for e in self.edges
        ])

    def canonical(self):
        "Key under which two graphs compare equal regardless of edge order."
        return (self.n, tuple(sorted(
            (e.u, e.v, e.w, bool(e.aug)) for e in self.edges
        )))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def is_connected(self):
        if self.n == 0:
            return True
        count = csgraph.connected_components(
            adjacency_matrix(self), directed=False, return_labels=False)
        return count == 1

    def check_adjacency(self):
        return _build_adjacency(self.n, self.edges) == self.adjacency


def _edge_from_tuple(t):
    if len(t) == 2:
        return Edge(t[0], t[1])
    if len(t) == 3:
        return Edge(t[0], t[1], t[2])
    return Edge(t[0], t[1], t[2], bool(t[3]))


def _checked_edge(n, u, v, w, aug):
    for x in (u, v):
        if not 0 <= x < n:
            raise NodeOutOfRange(f"node {x} outside 0..{n - 1}")
    if u == v:
        raise SelfLoop(f"self-loop at node {u}")
    w = float(w)
    if not (w > 0 and math.isfinite(w)):
        raise ValueError(f"edge weight must be positive and finite, not {w}")
    u, v = canonical_pair(int(u), int(v))
    return Edge(u, v, w, bool(aug))


def add_edge(g, u, v, w=DEFAULT_WEIGHT, aug=False):
    e = _checked_edge(g.n, u, v, w, aug)
    if g.has_edge(e.u, e.v):
        raise DuplicateEdge(f"edge {e.pair} already present")
    return Graph(g.n, g.edges + (e,))


def remove_edge_view(g, e):
    u, v = e.pair if isinstance(e, Edge) else canonical_pair(*e)
    if not g.has_edge(u, v):
        raise EdgeNotFound(f"edge {(u, v)} not in graph")
    return Graph(g.n, [x for x in g.edges if x.pair != (u, v)])


@attr.s(frozen=True, eq=False)
class DistanceMatrix:
    d = attr.ib(repr=False)
    mode = attr.ib()

    @property
    def n(self):
        return self.d.shape[0]

    def __getitem__(self, ij):
        return self.d[ij]

    def connected(self, i, j):
        return math.isfinite(self.d[i, j])


def adjacency_matrix(g):
    "Sparse symmetric adjacency of ``g`` holding the edge weights."
    rows = np.array([e.u for e in g.edges], dtype=np.int64)
    cols = np.array([e.v for e in g.edges], dtype=np.int64)
    vals = np.array([e.w for e in g.edges], dtype=float)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    return A + A.T


def shortest_path_lengths(g, mode=DistanceMode.HOPS):
    mode = DistanceMode(mode)
    if g.n == 0:
        d = np.zeros((0, 0))
    else:
        d = csgraph.shortest_path(adjacency_matrix(g), method="D",
                                  directed=False,
                                  unweighted=mode is DistanceMode.HOPS)
        # floating sums along different paths may disagree in the last bit
        d = np.minimum(d, d.T)
    d.setflags(write=False)
    return DistanceMatrix(d, mode)
