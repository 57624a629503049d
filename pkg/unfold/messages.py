# SPDX-License-Identifier: AGPL-3.0-only
from enum import Enum

import attr
import msgpack
import valideer as V


class Engine(Enum):
    FA2 = ("fa2", "ForceAtlas2")
    SM = ("sm", "Stress majorization")

    @property
    def label(self):
        return self.value[0]

    @property
    def pretty(self):
        return self.value[1]

    @classmethod
    def parse(cls, label):
        for x in cls:
            if x.label == label:
                return x
        raise ValueError(f"unknown engine {label!r}")


class Variant(Enum):
    # label, drawn graph, aggregate for the footprint heuristic
    ORIG = ("orig", "planar", None)
    ON_TOP = ("on_top", "augmented", None)
    REDRAW = ("redraw", "augmented", None)
    H_MIN = ("H_min", "augmented", "min")
    H_MAX = ("H_max", "augmented", "max")
    H_MEAN = ("H_mean", "augmented", "mean")
    H_NB = ("H_nb", "augmented", None)
    H_FIXED = ("H_fixed", "augmented", None)

    @property
    def label(self):
        return self.value[0]

    @property
    def drawn_graph(self):
        return self.value[1]

    @property
    def aggregate(self):
        return self.value[2]

    @property
    def heuristic(self):
        return self.aggregate is not None

    @property
    def reuses_orig(self):
        return self is Variant.ON_TOP

    @property
    def needs_augmentation(self):
        return self in (Variant.ON_TOP, Variant.REDRAW, Variant.H_FIXED)

    @classmethod
    def parse(cls, label):
        for x in cls:
            if x.label == label:
                return x
        raise ValueError(f"unknown variant {label!r}")

    @classmethod
    def standard(cls, augmented):
        """
        Variants drawn for a dataset; families without an augmentation skip
        on_top and redraw.
        """
        base = [cls.ORIG, cls.ON_TOP, cls.REDRAW, cls.H_MIN, cls.H_MAX,
                cls.H_MEAN, cls.H_NB]
        if augmented:
            return base
        return [x for x in base if x not in (cls.ON_TOP, cls.REDRAW)]


_thing = V.parsing(required_properties=True, additional_properties=None)
_thing.__enter__()


class BaseMessage:
    _filter = None

    def pack(self):
        return msgpack.dumps(attr.asdict(self, filter=self._filter))

    @classmethod
    def unpack(cls, data):
        x = msgpack.loads(data)
        # use adaption for nested data
        x = cls._validator.validate(x)
        return cls(**x)


def _is_blake2b_digest(x):
    # hex of a 64 byte blake2b digest
    return isinstance(x, str) and len(x) == 128


def _is_count(x):
    return isinstance(x, int) and x >= 0


_pair = V.AdaptTo(tuple, (_is_count, _is_count))


@attr.s
class FootprintMessage(BaseMessage):
    """
    Per-graph footprint cache: ``edges[i]`` has the path lengths
    ``lengths[i]``. ``graph_digest`` ties the cache to one graph file.
    """
    graph_digest = attr.ib()
    n = attr.ib()
    edges = attr.ib()
    lengths = attr.ib()
    _validator = V.parse({
        "graph_digest": _is_blake2b_digest,
        "n": _is_count,
        "edges": [_pair],
        "lengths": [V.AdaptTo(tuple, [_is_count])],
    })

    def __attrs_post_init__(self):
        if len(self.edges) != len(self.lengths):
            raise V.ValidationError(
                f"{len(self.edges)} edges but {len(self.lengths)} footprints")

    @classmethod
    def from_footprints(cls, graph_digest, n, footprints):
        edges = sorted(footprints)
        return cls(graph_digest, n, [list(e) for e in edges],
                   [list(footprints[e].lengths) for e in edges])

    def as_mapping(self):
        return {tuple(e): tuple(ls) for e, ls in zip(self.edges, self.lengths)}
