# SPDX-License-Identifier: AGPL-3.0-only
"""
Isolation forest over fixed-dimension real vectors.

Points are ordered lexicographically before fitting and every tree draws from
its own spawned random stream, so a fitted model depends only on the multiset
of points and the seed.
"""
import math

import attr
import numpy as np
from logbook import Logger

from unfold.errors import DimensionMismatch, TooFewPoints

log = Logger("unfold.anomaly")

DEFAULT_TREES = 100
DEFAULT_SUBSAMPLE = 256
DEFAULT_THRESHOLD = 0.5
# mean path lengths are float sums; identical points must not be flagged
SCORE_EPSILON = 1e-12


def average_path_length(q):
    """
    Average path length of an unsuccessful binary search tree lookup among
    ``q`` points, used to normalise isolation depths.
    """
    if q <= 1:
        return 0.0
    harmonic = math.fsum(1.0 / i for i in range(1, q))
    return 2.0 * harmonic - 2.0 * (q - 1) / q


@attr.s(frozen=True, slots=True)
class _Leaf:
    size = attr.ib()


@attr.s(frozen=True, slots=True)
class _Split:
    dim = attr.ib()
    value = attr.ib()
    left = attr.ib()
    right = attr.ib()


@attr.s(frozen=True)
class IsolationTree:
    root = attr.ib(repr=False)
    height_limit = attr.ib()

    def path_length(self, x):
        node = self.root
        depth = 0
        while isinstance(node, _Split):
            node = node.left if x[node.dim] < node.value else node.right
            depth += 1
        return depth + average_path_length(node.size)

    def height(self):
        def walk(node):
            if isinstance(node, _Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


def _grow(sample, rng, depth, limit):
    if depth >= limit or len(sample) <= 1:
        return _Leaf(len(sample))
    lo = sample.min(axis=0)
    hi = sample.max(axis=0)
    dims = np.flatnonzero(hi > lo)
    if not dims.size:
        return _Leaf(len(sample))
    q = int(dims[rng.integers(dims.size)])
    while True:
        p = float(rng.uniform(lo[q], hi[q]))
        if lo[q] < p < hi[q]:
            break
    mask = sample[:, q] < p
    return _Split(q, p,
                  _grow(sample[mask], rng, depth + 1, limit),
                  _grow(sample[~mask], rng, depth + 1, limit))


def _as_matrix(points, dim=None):
    rows = [np.asarray(p, dtype=float).ravel() for p in points]
    dims = {len(r) for r in rows}
    if len(dims) > 1:
        raise DimensionMismatch(f"points of mixed dimensions {sorted(dims)}")
    if dim is not None and dims and dims != {dim}:
        raise DimensionMismatch(f"expected dimension {dim}, got {dims.pop()}")
    if not rows:
        return np.empty((0, dim or 0))
    return np.vstack(rows)


@attr.s(frozen=True)
class IsolationForestModel:
    trees = attr.ib(repr=False)
    subsample = attr.ib()
    dim = attr.ib()
    threshold = attr.ib(default=DEFAULT_THRESHOLD)

    @property
    def normalizer(self):
        return average_path_length(self.subsample)

    def anomaly_score(self, point):
        x = _as_matrix([point], self.dim)[0]
        mean = float(np.mean([t.path_length(x) for t in self.trees]))
        return 2.0 ** (-mean / self.normalizer)

    def scores(self, points):
        X = _as_matrix(points, self.dim)
        return np.array([self.anomaly_score(x) for x in X])

    def flag_outliers(self, points):
        return [bool(s - self.threshold > SCORE_EPSILON)
                for s in self.scores(points)]


def fit(points, s=DEFAULT_TREES, psi=DEFAULT_SUBSAMPLE, seed=0,
        threshold=DEFAULT_THRESHOLD):
    """
    Fits ``s`` isolation trees, each on a subsample of ``min(psi, count)``
    points drawn without replacement.
    """
    X = _as_matrix(points)
    if len(X) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(X)}")
    if s < 1:
        raise ValueError(f"tree count must be positive, not {s}")
    X = X[np.lexsort(X.T[::-1])]
    psi = min(psi, len(X))
    limit = math.ceil(math.log2(psi))
    trees = []
    for stream in np.random.SeedSequence(seed).spawn(s):
        rng = np.random.default_rng(stream)
        sample = X[np.sort(rng.choice(len(X), size=psi, replace=False))]
        trees.append(IsolationTree(_grow(sample, rng, 0, limit), limit))
    log.debug("fitted {} trees on {} points, psi={}", s, len(X), psi)
    return IsolationForestModel(tuple(trees), psi, X.shape[1], threshold)


def anomaly_score(model, point):
    return model.anomaly_score(point)


def flag_outliers(model, points):
    return model.flag_outliers(points)
