# SPDX-License-Identifier: AGPL-3.0-only
import msgpack
import pytest
import valideer as V

from unfold.messages import Engine, FootprintMessage, Variant
from unfold.paths import all_footprints

DIGEST = "ab" * 64


def test_footprint_message_roundtrip(k4):
    footprints = all_footprints(k4)
    msg = FootprintMessage.from_footprints(DIGEST, k4.n, footprints)
    back = FootprintMessage.unpack(msg.pack())
    assert back.graph_digest == DIGEST
    assert back.n == 4
    assert back.as_mapping() == {p: f.lengths for p, f in footprints.items()}


def test_footprint_message_validation():
    bad = msgpack.dumps({"graph_digest": "abc", "n": 2, "edges": [[0, 1]],
                         "lengths": [[]]})
    with pytest.raises(V.ValidationError):
        FootprintMessage.unpack(bad)
    short = msgpack.dumps({"graph_digest": DIGEST, "n": 2,
                           "edges": [[0, 1]], "lengths": []})
    with pytest.raises(V.ValidationError):
        FootprintMessage.unpack(short)


def test_standard_variants():
    assert [v.label for v in Variant.standard(True)] == [
        "orig", "on_top", "redraw", "H_min", "H_max", "H_mean", "H_nb"]
    assert Variant.ON_TOP not in Variant.standard(False)
    assert len(Variant.standard(False)) == 5


def test_variant_properties():
    assert Variant.H_MAX.heuristic
    assert Variant.H_MAX.aggregate == "max"
    assert not Variant.H_NB.heuristic
    assert Variant.ORIG.drawn_graph == "planar"
    assert Variant.ON_TOP.reuses_orig
    assert Variant.H_FIXED.needs_augmentation
    assert not Variant.H_MEAN.needs_augmentation


def test_parsing_labels():
    assert Engine.parse("sm") is Engine.SM
    assert Engine.FA2.pretty == "ForceAtlas2"
    assert Variant.parse("H_fixed") is Variant.H_FIXED
    with pytest.raises(ValueError):
        Engine.parse("neato")
    with pytest.raises(ValueError):
        Variant.parse("H_median")
