# SPDX-License-Identifier: AGPL-3.0-only
"""
Dataset families: grids, Delaunay triangulations, deep triangulations and
sparse Rome-like graphs, plus their augmented versions and the graph text
format.

Everything here is a pure function of its parameters and seed.
"""
import math
import os
from enum import Enum

import attr
import numpy as np
import toml
from logbook import Logger

import unfold.util as uutil
from unfold.errors import (
    DegenerateInput,
    DuplicateEdge,
    InvalidSize,
    InvariantViolation,
    NodeOutOfRange,
    NotEnoughPairs,
    ParseError,
    SelfLoop,
)
from unfold.graph import Edge, Graph, canonical_pair

log = Logger("unfold.generators")

JITTER = 1e-9
MIN_CLEARANCE = 2 * JITTER
# super-triangle vertices sit this many point-set spans away from the data
SUPER_SCALE = 1e5
DEEP_BASE_FRACTION = 0.7
DEEP_MIN_CLUSTER = 3


class Family(Enum):
    GRID = ("grid", True)
    TRIANGULATION = ("triangulation", True)
    DEEP_TRIANGULATION = ("deep-triangulation", False)
    ROME = ("rome", False)
    SPARSE = ("sparse", False)

    @property
    def label(self):
        return self.value[0]

    @property
    def augmented(self):
        return self.value[1]

    @classmethod
    def parse(cls, label):
        for x in cls:
            if x.label == label:
                return x
        raise ValueError(f"unknown family {label!r}")


def _check_fraction(instance, attribute, value):
    if not 0 <= value < 1:
        raise InvalidSize(f"{attribute.name} must lie in [0, 1), not {value}")


@attr.s(frozen=True)
class GenSpec:
    family = attr.ib(converter=lambda x: x if isinstance(x, Family)
                     else Family.parse(x))
    seed = attr.ib(converter=int)
    rows = attr.ib(default=None)
    cols = attr.ib(default=None)
    n = attr.ib(default=None)
    m = attr.ib(default=None)
    augment_fraction = attr.ib(default=0.1, converter=float,
                               validator=_check_fraction)

    def __attrs_post_init__(self):
        if self.family is Family.GRID:
            if self.rows is None or self.cols is None \
               or self.rows < 2 or self.cols < 2:
                raise InvalidSize(f"grid needs rows, cols >= 2: {self}")
        elif self.family is not Family.ROME and self.n is None:
            raise InvalidSize(f"{self.family.label} needs a node count")


def fraction_count(fraction, n):
    # 0.7 * 90 is 62.99999999999999 in binary floating point
    return int(math.floor(fraction * n + 1e-9))


def gen_grid(rows, cols):
    if rows < 2 or cols < 2:
        raise InvalidSize(f"grid must be at least 2x2, not {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            x = r * cols + c
            if c + 1 < cols:
                edges.append(Edge(x, x + 1))
            if r + 1 < rows:
                edges.append(Edge(x, x + cols))
    return Graph(rows * cols, edges)


def augment(g, fraction, seed):
    """
    Adds ``floor(fraction * n)`` edges between random non-adjacent node pairs
    and flags them as augmenting.
    """
    if not 0 <= fraction < 1:
        raise InvalidSize(f"augment fraction must lie in [0, 1), not {fraction}")
    count = fraction_count(fraction, g.n)
    candidates = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)
                  if not g.has_edge(u, v)]
    if len(candidates) < count:
        raise NotEnoughPairs(f"need {count} non-adjacent pairs, graph has "
                             f"only {len(candidates)}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(candidates), size=count, replace=False)
    extra = [Edge(*candidates[i], aug=True) for i in chosen]
    return Graph(g.n, g.edges + tuple(extra))


def _jitter(rng, pts):
    return np.clip(pts + rng.uniform(-JITTER, JITTER, size=pts.shape), 0, 1)


def random_points(n, seed):
    rng = np.random.default_rng(seed)
    return _jitter(rng, rng.random((n, 2)))


def _in_circumcircle(a, b, c, d):
    # a, b, c counter-clockwise; positive iff d lies strictly inside
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (adx * (bdy * cd - bd * cdy)
            - ady * (bdx * cd - bd * cdx)
            + ad * (bdx * cdy - bdy * cdx)) > 0


def triangulate(points):
    """
    Delaunay triangulation by incremental Bowyer-Watson insertion into a
    super-triangle. Returns counter-clockwise index triples, sorted.
    """
    pts = [tuple(map(float, p)) for p in np.asarray(points, dtype=float)]
    n = len(pts)
    if n < 3:
        raise DegenerateInput(f"need at least 3 points, got {n}")
    arr = np.asarray(pts)
    lo, hi = arr.min(axis=0), arr.max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)
    cx, cy = (lo + hi) / 2
    big = SUPER_SCALE * span
    pts.extend([(cx - 3 * big, cy - 3 * big),
                (cx + 3 * big, cy - 3 * big),
                (cx, cy + 3 * big)])
    triangles = {(n, n + 1, n + 2)}

    for i in range(n):
        p = pts[i]
        bad = [t for t in triangles
               if _in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], p)]
        boundary = {}
        for a, b, c in bad:
            for e in ((a, b), (b, c), (c, a)):
                key = canonical_pair(*e)
                if key in boundary:
                    # shared by two cavity triangles, so not on the boundary
                    boundary[key] = None
                else:
                    boundary[key] = e
        triangles.difference_update(bad)
        for e in boundary.values():
            if e is not None:
                triangles.add((e[0], e[1], i))

    result = sorted(_rotate_min(t) for t in triangles if max(t) < n)
    if not result:
        raise DegenerateInput("all points are collinear")
    return result


def _rotate_min(t):
    k = t.index(min(t))
    return t[k:] + t[:k]


def _triangle_edges(triangles):
    pairs = set()
    for a, b, c in triangles:
        pairs.update((canonical_pair(a, b), canonical_pair(b, c),
                      canonical_pair(c, a)))
    return sorted(pairs)


def delaunay(points):
    points = np.asarray(points, dtype=float)
    return Graph(len(points), [Edge(u, v)
                               for u, v in _triangle_edges(triangulate(points))])


def triangulation(n, seed):
    if n < 3:
        raise InvalidSize(f"triangulation needs n >= 3, not {n}")
    pts = random_points(n, seed)
    return delaunay(pts), pts


def gen_triangulation(n, seed):
    return triangulation(n, seed)[0]


def _side_clearance(p, corners):
    "Signed distance from ``p`` to the nearest side; negative when outside."
    a, b, c = corners
    orient = np.sign((b[0] - a[0]) * (c[1] - a[1])
                     - (b[1] - a[1]) * (c[0] - a[0]))
    out = math.inf
    for i in range(3):
        s, t = corners[i], corners[(i + 1) % 3]
        side = t - s
        cross = side[0] * (p[1] - s[1]) - side[1] * (p[0] - s[0])
        out = min(out, orient * cross / math.hypot(side[0], side[1]))
    return out


def _points_in_triangle(rng, corners, r):
    out = []
    while len(out) < r:
        s, t = rng.random(2)
        if s + t > 1:
            s, t = 1 - s, 1 - t
        bary = (1 - s - t, s, t)
        if min(bary) < 1e-6:
            continue
        p = _jitter(rng, bary[0] * corners[0] + bary[1] * corners[1]
                    + bary[2] * corners[2])
        # the jittered point must stay strictly inside its host
        if _side_clearance(p, corners) < MIN_CLEARANCE:
            continue
        out.append(p)
    return np.asarray(out)


def deep_triangulation(n, seed):
    """
    Triangulates ``floor(0.7 n)`` random points, then repeatedly drops a
    random cluster of points into a random triangle and triangulates the
    cluster together with the triangle's corners until ``n`` points exist.
    Returns the graph and the generating points.
    """
    if n < 10:
        raise InvalidSize(f"deep triangulation needs n >= 10, not {n}")
    rng = np.random.default_rng(seed)
    base = fraction_count(DEEP_BASE_FRACTION, n)
    pts = _jitter(rng, rng.random((base, 2)))
    triangles = triangulate(pts)
    pairs = set(_triangle_edges(triangles))
    remaining = n - base
    while remaining > 0:
        host = triangles.pop(int(rng.integers(len(triangles))))
        if remaining < DEEP_MIN_CLUSTER:
            r = remaining
        else:
            r = int(rng.integers(DEEP_MIN_CLUSTER, remaining + 1))
        inner = _points_in_triangle(rng, pts[list(host)], r)
        ids = list(host) + list(range(len(pts), len(pts) + r))
        local = np.vstack([pts[list(host)], inner])
        pts = np.vstack([pts, inner])
        for t in triangulate(local):
            mapped = tuple(ids[x] for x in t)
            triangles.append(mapped)
            pairs.update(canonical_pair(mapped[i], mapped[(i + 1) % 3])
                         for i in range(3))
        remaining -= r
        log.debug("deep triangulation: placed {} points in {}, {} left",
                  r, host, remaining)
    return Graph(n, [Edge(u, v) for u, v in sorted(pairs)]), pts


def gen_deep_triangulation(n, seed):
    return deep_triangulation(n, seed)[0]


SPARSE_DENSITY = 1.3


def gen_sparse(n, m, seed):
    """
    A connected sparse graph with ``n`` nodes and ``m`` edges: a random
    recursive tree plus ``m - n + 1`` random chords. Used as a Rome-like
    sample when no curated Rome files are configured.
    """
    if n < 3:
        raise InvalidSize(f"sparse graph needs n >= 3, not {n}")
    if not n - 1 <= m <= n * (n - 1) // 2:
        raise InvalidSize(f"sparse graph on {n} nodes cannot have {m} edges")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        parent = order[int(rng.integers(i))]
        pairs.add(canonical_pair(int(order[i]), int(parent)))
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n)
                  if (u, v) not in pairs]
    chosen = rng.choice(len(candidates), size=m - n + 1, replace=False)
    pairs.update(candidates[i] for i in chosen)
    return Graph(n, [Edge(u, v) for u, v in sorted(pairs)])


def generate(spec):
    """
    Returns ``(G, G_aug)`` for a generation spec; ``G_aug`` is None for the
    families that are not augmented.
    """
    sub = uutil.derive_seed(spec.seed, "augment")
    if spec.family is Family.GRID:
        g = gen_grid(spec.rows, spec.cols)
    elif spec.family is Family.TRIANGULATION:
        g = gen_triangulation(spec.n, spec.seed)
    elif spec.family is Family.DEEP_TRIANGULATION:
        g = gen_deep_triangulation(spec.n, spec.seed)
    elif spec.family is Family.SPARSE:
        m = spec.m if spec.m is not None \
            else fraction_count(SPARSE_DENSITY, spec.n)
        g = gen_sparse(spec.n, m, spec.seed)
    else:
        raise ValueError(f"{spec.family.label} graphs are loaded, "
                         "not generated")
    if not spec.family.augmented:
        return g, None
    return g, augment(g, spec.augment_fraction, sub)


def format_graph(g):
    lines = [f"{g.n} {g.m}"]
    for e in g.edges:
        lines.append(f"{e.u} {e.v} {e.w:.17g} {int(e.aug)}")
    return "\n".join(lines) + "\n"


def write_graph_file(g, fpath):
    uutil.write_atomic(fpath, format_graph(g))


def _remap(labels, n, filename):
    try:
        ints = [int(x) for x in labels]
    except ValueError:
        ints = None
    if ints is not None and all(0 <= x < n for x in ints):
        return {x: int(x) for x in labels}
    distinct = sorted(set(labels), key=int if ints is not None else str)
    if len(distinct) > n:
        raise ParseError(f"{len(distinct)} distinct node labels but header "
                         f"declares n={n}", filename=filename)
    return {x: i for i, x in enumerate(distinct)}


def parse_graph(text, filename=None):
    header = None
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = s.split()
        if header is None:
            if len(fields) != 2:
                raise ParseError("header must be 'n m'", lineno, filename)
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError:
                raise ParseError(f"bad header {s!r}", lineno, filename) \
                    from None
            continue
        if not 2 <= len(fields) <= 4:
            raise ParseError("edge lines are 'u v w aug'", lineno, filename)
        try:
            w = float(fields[2]) if len(fields) > 2 else 1.0
            aug = fields[3] if len(fields) > 3 else "0"
            if aug not in ("0", "1"):
                raise ValueError(aug)
        except ValueError:
            raise ParseError(f"bad edge line {s!r}", lineno, filename) \
                from None
        if not (w > 0 and math.isfinite(w)):
            raise ParseError(f"weight must be positive, not {w}",
                             lineno, filename)
        records.append((lineno, fields[0], fields[1], w, aug == "1"))
    if header is None:
        raise ParseError("missing header", None, filename)
    n, m = header
    if len(records) != m:
        raise ParseError(f"header declares {m} edges, found {len(records)}",
                         None, filename)
    labels = [x for r in records for x in (r[1], r[2])]
    mapping = _remap(labels, n, filename)
    edges = []
    seen = set()
    for lineno, a, b, w, aug in records:
        u, v = mapping[a], mapping[b]
        if u == v:
            raise InvariantViolation(
                f"{filename or '<text>'}:{lineno}: self-loop at {a}")
        pair = canonical_pair(u, v)
        if pair in seen:
            raise InvariantViolation(
                f"{filename or '<text>'}:{lineno}: duplicate edge {a} {b}")
        seen.add(pair)
        edges.append((u, v, w, aug))
    try:
        return Graph.from_edges(n, edges)
    except (SelfLoop, DuplicateEdge, NodeOutOfRange) as e:
        raise InvariantViolation(str(e)) from e


def load_graph_file(fpath):
    with open(fpath, "r") as f:
        return parse_graph(f.read(), filename=os.fspath(fpath))


def write_manifest(entries, fpath):
    uutil.write_atomic(fpath, toml.dumps({"graph": list(entries)}))


def read_manifest(fpath):
    with open(fpath, "r") as f:
        return toml.load(f).get("graph", [])
