# SPDX-License-Identifier: AGPL-3.0-only
import math
from enum import Enum

import attr
import pandas as pd
from logbook import Logger

import unfold.anomaly as anomaly
import unfold.util as uutil
from unfold.errors import EmptyFootprint, NoAugEdges
from unfold.paths import Footprint, all_footprints

log = Logger("unfold.weighting")

DEFAULT_K = 4
FIXED_WEIGHT = 0.01


class Aggregate(Enum):
    MIN = "min"
    MAX = "max"
    MEAN = "mean"

    @property
    def label(self):
        return self.value

    def __call__(self, values):
        values = list(values)
        if not values:
            raise EmptyFootprint("cannot aggregate an empty footprint")
        if self is Aggregate.MIN:
            return float(min(values))
        if self is Aggregate.MAX:
            return float(max(values))
        return math.fsum(values) / len(values)


@attr.s(frozen=True)
class ForestParams:
    trees = attr.ib(default=anomaly.DEFAULT_TREES)
    subsample = attr.ib(default=anomaly.DEFAULT_SUBSAMPLE)
    threshold = attr.ib(default=anomaly.DEFAULT_THRESHOLD)

    @trees.validator
    def _check_trees(self, attribute, value):
        if value < 1:
            raise ValueError(f"tree count must be positive, not {value}")

    @subsample.validator
    def _check_subsample(self, attribute, value):
        if value < 2:
            raise ValueError(f"subsample must be at least 2, not {value}")


@attr.s(frozen=True)
class FeatureVector:
    values = attr.ib(converter=tuple)
    edge = attr.ib(default=None)

    def __len__(self):
        return len(self.values)


def _lengths(f):
    return list(f.lengths if isinstance(f, Footprint) else f)


def aggregate(f, M):
    return Aggregate(M)(_lengths(f))


def normalize_footprint(f, k, M):
    """
    Pads a footprint shorter than ``k`` with its aggregate; a longer one
    keeps its first ``k - 1`` lengths followed by the aggregate of the rest.
    """
    M = Aggregate(M)
    lengths = _lengths(f)
    if not lengths:
        raise EmptyFootprint("bridges have no feature vector")
    if k < 1:
        raise ValueError(f"k must be positive, not {k}")
    edge = f.edge if isinstance(f, Footprint) else None
    if len(lengths) < k:
        values = lengths + [M(lengths)] * (k - len(lengths))
    elif len(lengths) == k:
        values = lengths
    else:
        values = lengths[:k - 1] + [M(lengths[k - 1:])]
    return FeatureVector([float(x) for x in values], edge)


@attr.s(frozen=True)
class WeightingResult:
    graph = attr.ib()
    footprints = attr.ib(repr=False)
    features = attr.ib(repr=False)
    scores = attr.ib(repr=False)
    flags = attr.ib(repr=False)
    k = attr.ib()
    aggregate = attr.ib()
    seed = attr.ib()

    @property
    def outliers(self):
        return sorted(p for p, x in self.flags.items() if x)


def weight_heuristic(g, k=DEFAULT_K, M=Aggregate.MEAN, params=ForestParams(),
                     seed=0, footprints=None, jobs=1):
    """
    Re-weights the outlier edges of ``g``. ``footprints`` may carry
    precomputed footprints keyed by edge pair.
    """
    M = Aggregate(M)
    if footprints is None:
        footprints = all_footprints(g, jobs=jobs)
    sample = [e.pair for e in g.edges if not footprints[e.pair].bridge]
    features = {p: normalize_footprint(footprints[p], k, M) for p in sample}
    scores, flagged = {}, {}
    if len(sample) < 2:
        log.info("{} non-bridge edges, nothing to isolate", len(sample))
    else:
        points = [features[p].values for p in sample]
        model = anomaly.fit(points, s=params.trees, psi=params.subsample,
                            seed=seed, threshold=params.threshold)
        scores = dict(zip(sample, model.scores(points)))
        flagged = dict(zip(sample, model.flag_outliers(points)))
    flags = {e.pair: flagged.get(e.pair, False) for e in g.edges}
    weights = {p: M(footprints[p].lengths) if flags[p] else 1.0
               for p in flags}
    log.debug("{}: flagged {} of {} edges", M.label, sum(flags.values()),
              g.m)
    return WeightingResult(g.with_weights(weights), footprints, features,
                           scores, flags, k, M, seed)


def neighborhood_weight(g, u, v):
    nu, nv = set(g.neighbors(u)), set(g.neighbors(v))
    return float(len(nu | nv) - len(nu & nv))


def weight_neighborhood(g, pairs=None):
    if pairs is None:
        pairs = [e.pair for e in g.edges]
    return {p: neighborhood_weight(g, *p) for p in pairs}


def weight_fixed(g, w=FIXED_WEIGHT):
    aug = [e.pair for e in g.aug_edges()]
    if not aug:
        raise NoAugEdges("graph has no augmenting edges to re-weight")
    return g.with_weights({e.pair: w if e.aug else 1.0 for e in g.edges})


def weighting_report(result):
    rows = []
    for e in result.graph.edges:
        f = result.footprints[e.pair]
        feat = result.features.get(e.pair)
        score = result.scores.get(e.pair)
        rows.append({
            "u": e.u,
            "v": e.v,
            "aug": int(e.aug),
            "footprint": " ".join(str(x) for x in f.lengths),
            "features": "" if feat is None
            else " ".join(f"{x:.17g}" for x in feat.values),
            "score": "" if score is None else f"{score:.17g}",
            "outlier": int(result.flags[e.pair]),
            "weight": f"{e.w:.17g}",
        })
    return pd.DataFrame(rows, columns=["u", "v", "aug", "footprint",
                                       "features", "score", "outlier",
                                       "weight"])


def write_weighting_report(result, fpath):
    uutil.write_atomic(fpath, weighting_report(result).to_csv(index=False))
