# SPDX-License-Identifier: AGPL-3.0-only
import attr
import numpy as np
import pytest

import unfold.layout as ulayout
from unfold.errors import NumericalDivergence, ParseError
from unfold.generators import augment, gen_grid
from unfold.graph import Graph, shortest_path_lengths
from unfold.layout import Fa2Params, Layout, SmParams, SuiteParams
from unfold.messages import Engine, Variant
from unfold.metrics import count_crossings
from unfold.weighting import ForestParams

from conftest import cycle, path_graph

QUICK = SuiteParams(restarts=2, forest=ForestParams(trees=10),
                    fa2=Fa2Params(iterations=30),
                    sm=SmParams(iterations=60))


def test_random_layout():
    a = ulayout.random_layout(10, 3)
    assert a.coords.shape == (10, 2)
    assert a.finite()
    assert np.array_equal(a.coords, ulayout.random_layout(10, 3).coords)
    assert not np.array_equal(a.coords, ulayout.random_layout(10, 4).coords)
    with pytest.raises(ValueError):
        a.coords[0, 0] = 1.0
    with pytest.raises(ValueError):
        ulayout.random_layout(0, 1)


def test_layout_shape_is_checked():
    with pytest.raises(ValueError):
        Layout(np.zeros((3, 3)))


def test_fa2_single_edge_is_symmetric():
    g = path_graph(2)
    out = ulayout.fa2(g, Layout([(0.0, 0.0), (1.0, 0.0)]),
                      Fa2Params(iterations=200))
    X = out.coords
    assert out.engine == "fa2"
    assert np.allclose(X.mean(axis=0), (0.5, 0.0))
    assert abs(X[0, 1]) < 1e-9 and abs(X[1, 1]) < 1e-9
    assert np.linalg.norm(X[0] - X[1]) > 0


def test_fa2_without_gravity_keeps_centroid():
    g = cycle(7)
    init = ulayout.random_layout(7, 5)
    out = ulayout.fa2(g, init, Fa2Params(iterations=100, gravity=0.0))
    assert np.allclose(out.coords.mean(axis=0), init.coords.mean(axis=0))


def relabel(g, init, seed=0):
    perm = np.random.default_rng(seed).permutation(g.n)
    relabelled = Graph.from_edges(
        g.n, [(int(perm[e.u]), int(perm[e.v]), e.w, e.aug) for e in g.edges])
    init_p = np.empty_like(init)
    init_p[perm] = init
    return relabelled, init_p, perm


def test_fa2_commutes_with_relabelling():
    g = augment(gen_grid(4, 4), 0.1, 1)
    init = ulayout.random_layout(g.n, 2).coords
    relabelled, init_p, perm = relabel(g, init)
    p = Fa2Params(iterations=50)
    a = ulayout.fa2(g, Layout(init), p).coords
    b = ulayout.fa2(relabelled, Layout(init_p), p).coords
    assert np.allclose(a, b[perm], atol=1e-6)


def test_fa2_divergence_is_reported():
    init = Layout([(np.nan, 0.0), (1.0, 1.0), (2.0, 0.0)])
    with pytest.raises(NumericalDivergence):
        ulayout.fa2(path_graph(3), init, Fa2Params(iterations=5))


def test_fa2_params_are_validated():
    with pytest.raises(ValueError):
        Fa2Params(iterations=0)
    with pytest.raises(ValueError):
        Fa2Params(gravity=-1)


def test_stress_of_exact_embedding():
    g = path_graph(4)
    D = shortest_path_lengths(g)
    X = [(float(i), 0.0) for i in range(4)]
    assert ulayout.stress(X, D) == pytest.approx(0.0)
    assert ulayout.stress([(0, 0), (1, 0), (1, 1), (0, 1)], D) > 0


def test_sm_single_edge():
    out = ulayout.stress_majorization(path_graph(2),
                                      ulayout.random_layout(2, 9))
    assert np.linalg.norm(out.coords[0] - out.coords[1]) == \
        pytest.approx(1.0)
    assert out.stress_history[-1] == pytest.approx(0.0, abs=1e-12)


def test_sm_unfolds_a_path():
    init = Layout([(0.0, 0.0), (0.7, 0.2), (1.5, -0.1), (2.1, 0.3),
                   (3.2, 0.0)])
    out = ulayout.stress_majorization(
        path_graph(5), init, SmParams(iterations=5000, tolerance=1e-12))
    assert out.stress_history[-1] < 1e-6
    d = np.linalg.norm(out.coords[4] - out.coords[0])
    assert d == pytest.approx(4.0, abs=1e-3)


def test_sm_stress_never_increases():
    g = augment(gen_grid(5, 5), 0.1, 3)
    out = ulayout.stress_majorization(g, ulayout.random_layout(g.n, 1),
                                      SmParams(iterations=100))
    history = out.stress_history
    assert len(history) == out.iterations + 1
    for before, after in zip(history, history[1:]):
        assert after <= before * (1 + 1e-9)


def test_sm_respects_weights():
    g = path_graph(3).with_weights({(1, 2): 3.0})
    out = ulayout.stress_majorization(g, ulayout.random_layout(3, 2),
                                      SmParams(tolerance=1e-12))
    X = out.coords
    assert out.iterations < 2000
    assert np.linalg.norm(X[1] - X[2]) == pytest.approx(3.0, abs=1e-3)
    assert np.linalg.norm(X[0] - X[1]) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("seed", range(5))
def test_sm_straightens_a_three_node_path(seed):
    out = ulayout.stress_majorization(path_graph(3),
                                      ulayout.random_layout(3, seed))
    assert out.stress_history[-1] <= 1e-9
    X = out.coords
    assert np.linalg.norm(X[0] - X[2]) == pytest.approx(2.0, abs=1e-4)


def test_relaxed_steps_beat_plain_guttman():
    g = path_graph(3)
    init = ulayout.random_layout(3, 0)
    budget = SmParams(iterations=300, tolerance=1e-15)
    plain = ulayout.stress_majorization(g, init, attr.evolve(budget,
                                                             relaxed=False))
    relaxed = ulayout.stress_majorization(g, init, budget)
    assert relaxed.stress_history[-1] < plain.stress_history[-1]
    for h in (plain.stress_history, relaxed.stress_history):
        assert all(b <= a * (1 + 1e-9) for a, b in zip(h, h[1:]))


def test_sm_commutes_with_relabelling():
    g = augment(gen_grid(4, 4), 0.1, 2)
    init = ulayout.random_layout(g.n, 3).coords
    relabelled, init_p, perm = relabel(g, init, seed=1)
    p = SmParams(iterations=100)
    a = ulayout.stress_majorization(g, Layout(init), p).coords
    b = ulayout.stress_majorization(relabelled, Layout(init_p), p).coords
    assert np.allclose(a, b[perm], atol=1e-6)


def test_sm_pair_weights():
    g = cycle(4)
    plain = ulayout.stress_majorization(g, ulayout.random_layout(4, 0))
    weighted = ulayout.stress_majorization(
        g, ulayout.random_layout(4, 0), pair_weights={(0, 1): 4.0})
    assert plain.finite() and weighted.finite()


def test_run_engine_accepts_labels():
    g = path_graph(3)
    init = ulayout.random_layout(3, 0)
    assert ulayout.run_engine("sm", g, init).engine == "sm"
    assert ulayout.run_engine(Engine.FA2, g, init,
                              Fa2Params(iterations=3)).engine == "fa2"


def test_best_of_k_keeps_fewest_crossings():
    g = cycle(8)
    seeds = [7, 3, 5, 11]

    def run(g, init):
        return init

    best = ulayout.best_of_k(run, g, seeds)
    counts = {s: count_crossings(g, ulayout.random_layout(8, s))
              for s in sorted(seeds)}
    fewest = min(counts.values())
    assert best.seed == min(s for s in counts if counts[s] == fewest)
    with pytest.raises(ValueError):
        ulayout.best_of_k(run, g, [])


def test_forest_seed_is_engine_independent():
    assert ulayout.forest_seed(12) == ulayout.forest_seed(12)
    assert ulayout.forest_seed(12) != ulayout.forest_seed(13)


def test_suite_variants():
    assert len(ulayout.suite_variants(True)) == 7
    assert len(ulayout.suite_variants(False)) == 5
    extra = ulayout.suite_variants(True, ["H_fixed"])
    assert extra[-1] is Variant.H_FIXED
    assert Variant.H_FIXED not in ulayout.suite_variants(False, ["H_fixed"])
    only_mean = ulayout.suite_variants(True, aggregates=("mean",))
    assert Variant.H_MIN not in only_mean
    assert Variant.H_MEAN in only_mean


@pytest.mark.parametrize("engine", list(Engine))
def test_layout_suite_augmented(engine):
    g = gen_grid(4, 4)
    g_aug = augment(g, 0.1, 2)
    suite = ulayout.layout_suite(g, g_aug, engine, 5, QUICK)
    assert list(suite) == Variant.standard(True)
    assert np.array_equal(suite[Variant.ON_TOP].coords,
                          suite[Variant.ORIG].coords)
    for variant, layout in suite.items():
        assert layout.variant == variant.label
        assert layout.engine == engine.label
        assert layout.n == g.n
        assert layout.finite()


def test_layout_suite_is_deterministic():
    g = gen_grid(3, 4)
    g_aug = augment(g, 0.1, 0)
    a = ulayout.layout_suite(g, g_aug, "fa2", 1, QUICK)
    b = ulayout.layout_suite(g, g_aug, "fa2", 1, QUICK)
    for variant in a:
        assert np.array_equal(a[variant].coords, b[variant].coords)


def test_layout_suite_without_augmentation():
    g = cycle(6)
    suite = ulayout.layout_suite(g, None, Engine.SM, 2, QUICK)
    assert list(suite) == Variant.standard(False)


def test_layout_suite_extra_variant():
    g = gen_grid(4, 4)
    g_aug = augment(g, 0.1, 2)
    params = SuiteParams(restarts=1, fa2=Fa2Params(iterations=10),
                         forest=ForestParams(trees=5),
                         extra_variants=("H_fixed",))
    suite = ulayout.layout_suite(g, g_aug, Engine.FA2, 0, params)
    assert Variant.H_FIXED in suite
    assert len(suite) == 8


def test_on_top_needs_orig():
    g = gen_grid(3, 3)
    with pytest.raises(ValueError):
        ulayout.draw_variant(Variant.ON_TOP, g, augment(g, 0.2, 0),
                             Engine.FA2, 0, QUICK)


def test_layout_file_roundtrip(tmp_path):
    layout = Layout([(0.1, 1 / 3), (-2.5, 1e-20)], engine="sm",
                    variant="H_mean", seed=42, iterations=17)
    fpath = tmp_path / "x.layout"
    ulayout.write_layout(layout, fpath)
    assert fpath.read_text().splitlines()[:2] == ["# sm H_mean 42 17", "2"]
    back = ulayout.read_layout(fpath)
    assert np.array_equal(back.coords, layout.coords)
    assert (back.engine, back.variant, back.seed, back.iterations) == \
        ("sm", "H_mean", 42, 17)


def test_parse_layout_errors():
    with pytest.raises(ParseError):
        ulayout.parse_layout("3\n0 0\n1 1\n")
    with pytest.raises(ParseError) as e:
        ulayout.parse_layout("2\n0 0\n1 one\n")
    assert e.value.lineno == 3
    assert ulayout.parse_layout("1\n0.5 2\n").coords.tolist() == [[0.5, 2.0]]
