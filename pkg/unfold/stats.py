# SPDX-License-Identifier: AGPL-3.0-only
import math

import attr
import numpy as np
import scipy.stats

from unfold.errors import AllZeroDifferences, EmptyInput, IncompleteRecords

ALPHA = 0.05
# sign assignments are enumerated up to this many non-zero differences
EXACT_LIMIT = 15


@attr.s(frozen=True)
class PairedSample:
    xs = attr.ib(converter=lambda x: tuple(float(v) for v in x))
    ys = attr.ib(converter=lambda x: tuple(float(v) for v in x))

    def __attrs_post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError(f"paired sample of unequal lengths "
                             f"{len(self.xs)} and {len(self.ys)}")
        if not self.xs:
            raise EmptyInput("paired sample is empty")


@attr.s(frozen=True)
class WilcoxonResult:
    statistic = attr.ib()
    p = attr.ib()
    n = attr.ib()
    exact = attr.ib()

    def __iter__(self):
        return iter((self.statistic, self.p))

    @property
    def significant(self):
        return self.p < ALPHA


def _exact_p(ranks, w):
    n = len(ranks)
    total = float(ranks.sum())
    signs = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    plus = signs @ ranks
    extreme = np.minimum(plus, total - plus) <= w + 1e-9
    return min(1.0, float(extreme.sum()) / 2 ** n)


def _normal_p(ranks, w):
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 \
        - float((counts ** 3 - counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    z = (abs(w - mean) - 0.5) / math.sqrt(var)
    return min(1.0, 2.0 * float(scipy.stats.norm.sf(max(z, 0.0))))


def wilcoxon_signed_rank(sample):
    """
    Two-sided Wilcoxon signed-rank test. Zero differences are dropped; tied
    magnitudes share their mid-rank. Returns ``(W, p)`` unpackable.
    """
    if not isinstance(sample, PairedSample):
        sample = PairedSample(*sample)
    d = np.array(sample.xs) - np.array(sample.ys)
    d = d[d != 0]
    if not d.size:
        raise AllZeroDifferences("every paired difference is zero")
    ranks = scipy.stats.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    exact = d.size <= EXACT_LIMIT
    p = _exact_p(ranks, w) if exact else _normal_p(ranks, w)
    return WilcoxonResult(w, p, int(d.size), exact)


def median(values):
    values = sorted(float(x) for x in values)
    if not values:
        raise EmptyInput("median of no values")
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return (values[mid - 1] + values[mid]) / 2.0


@attr.s(frozen=True)
class Comparison:
    dataset = attr.ib()
    engine = attr.ib()
    metric = attr.ib()
    variant_a = attr.ib()
    variant_b = attr.ib()
    median_a = attr.ib()
    median_b = attr.ib()
    W = attr.ib()
    p = attr.ib()

    @property
    def significant(self):
        return self.p is not None and self.p < ALPHA

    def as_row(self):
        row = attr.asdict(self)
        row["significant"] = self.significant
        return row


def compare(records, dataset, engine, metric, a, b):
    """
    Compares ``metric`` between variants ``a`` and ``b`` over the graphs of
    one dataset and engine. ``records`` is the records table; missing
    cells of one variant raise IncompleteRecords. A metric that is absent
    for some graph (no crossings, say) drops that pair.
    """
    sub = records[(records["dataset"] == dataset)
                  & (records["engine"] == engine)]
    left = sub[sub["variant"] == a].set_index("graph_id")[metric]
    right = sub[sub["variant"] == b].set_index("graph_id")[metric]
    if set(left.index) != set(right.index):
        missing = set(left.index) ^ set(right.index)
        raise IncompleteRecords(f"{dataset}/{engine}: {a} and {b} differ on "
                                f"graphs {sorted(missing)}")
    paired = left.to_frame("a").join(right.to_frame("b")).dropna()
    if paired.empty:
        return Comparison(dataset, engine, metric, a, b, None, None,
                          None, None)
    try:
        W, p = wilcoxon_signed_rank(PairedSample(paired["a"], paired["b"]))
    except AllZeroDifferences:
        W, p = 0.0, 1.0
    return Comparison(dataset, engine, metric, a, b,
                      median(paired["a"]), median(paired["b"]), W, p)
