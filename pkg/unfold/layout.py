# SPDX-License-Identifier: AGPL-3.0-only
"""
Weighted spring layouts: a ForceAtlas2 style force-directed engine, stress
majorization, best-of-k restarts and the per-graph suite of drawing variants.

Edge weights mean desired relative length. Stress majorization uses them as
shortest-path lengths; ForceAtlas2 turns them into the attraction multiplier
``w ** weight_influence``.
"""
import math
import os

import attr
import numpy as np
from logbook import Logger

import unfold.util as uutil
import unfold.weighting as weighting
from unfold.errors import (
    DegenerateGeometry,
    NumericalDivergence,
    ParseError,
)
from unfold.graph import DistanceMode, shortest_path_lengths
from unfold.messages import Engine, Variant
from unfold.metrics import count_crossings

log = Logger("unfold.layout")

DEFAULT_ITERATIONS = 2000
DEFAULT_RESTARTS = 5
MAX_RELAXATION = 2.0 ** 16


@attr.s(frozen=True, eq=False)
class Layout:
    coords = attr.ib(converter=lambda x: np.array(x, dtype=float), repr=False)
    engine = attr.ib(default=None)
    variant = attr.ib(default=None)
    seed = attr.ib(default=None)
    iterations = attr.ib(default=0)
    stress_history = attr.ib(default=(), converter=tuple, repr=False)

    def __attrs_post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError(f"coordinates must be n x 2, not "
                             f"{self.coords.shape}")
        self.coords.setflags(write=False)

    @property
    def n(self):
        return self.coords.shape[0]

    def finite(self):
        return bool(np.all(np.isfinite(self.coords)))


def random_layout(n, seed):
    if n < 1:
        raise ValueError(f"layout needs at least one node, not {n}")
    return Layout(np.random.default_rng(seed).random((n, 2)), seed=seed)


@attr.s(frozen=True)
class Fa2Params:
    iterations = attr.ib(default=DEFAULT_ITERATIONS)
    repulsion = attr.ib(default=1.0)
    gravity = attr.ib(default=1.0)
    weight_influence = attr.ib(default=-1.0)
    jitter_tolerance = attr.ib(default=1.0)
    initial_speed = attr.ib(default=1.0)
    max_step = attr.ib(default=10.0)

    @iterations.validator
    def _check_iterations(self, attribute, value):
        if value < 1:
            raise ValueError(f"iterations must be positive, not {value}")

    @repulsion.validator
    def _check_repulsion(self, attribute, value):
        if value <= 0:
            raise ValueError(f"repulsion must be positive, not {value}")

    @gravity.validator
    def _check_gravity(self, attribute, value):
        if value < 0:
            raise ValueError(f"gravity must not be negative, not {value}")


@attr.s(frozen=True)
class SmParams:
    iterations = attr.ib(default=DEFAULT_ITERATIONS)
    tolerance = attr.ib(default=1e-7)
    relaxed = attr.ib(default=True)

    @tolerance.validator
    def _check_tolerance(self, attribute, value):
        if value <= 0:
            raise ValueError(f"tolerance must be positive, not {value}")


def _check_finite(X, engine, iteration):
    if not np.all(np.isfinite(X)):
        raise NumericalDivergence(f"{engine} diverged at iteration "
                                  f"{iteration}")


def fa2_forces(g, X, p):
    """
    Net force on every node: degree-weighted repulsion between all pairs,
    linear attraction along edges, and gravity toward the centroid.
    """
    n = len(X)
    mass = np.array([g.degree(x) + 1.0 for x in range(n)])
    diff = X[:, None, :] - X[None, :, :]
    d2 = (diff ** 2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(d2 > 0,
                          p.repulsion * np.outer(mass, mass) / d2, 0.0)
    F = (factor[:, :, None] * diff).sum(axis=1)

    if g.m:
        eu = np.array([e.u for e in g.edges])
        ev = np.array([e.v for e in g.edges])
        w = np.array([e.w for e in g.edges]) ** p.weight_influence
        pull = w[:, None] * (X[eu] - X[ev])
        np.add.at(F, eu, -pull)
        np.add.at(F, ev, pull)

    if p.gravity:
        toward = X - X.mean(axis=0)
        norm = np.linalg.norm(toward, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(norm[:, None] > 0, toward / norm[:, None], 0.0)
        F -= p.gravity * mass[:, None] * unit
    return F, mass


def fa2(g, init, p=Fa2Params()):
    """
    Runs ForceAtlas2 for ``p.iterations`` steps. One global step factor,
    adapted from the swinging and traction of the whole system, scales every
    node's force, so without gravity the centroid never moves.
    """
    X = np.array(init.coords, dtype=float)
    n = len(X)
    prev = np.zeros_like(X)
    speed = p.initial_speed
    efficiency = 1.0
    for it in range(p.iterations):
        F, mass = fa2_forces(g, X, p)
        swinging = mass * np.linalg.norm(F - prev, axis=1)
        traction = mass * np.linalg.norm(F + prev, axis=1) / 2
        total_swing = float(swinging.sum())
        total_traction = float(traction.sum())

        estimated = 0.05 * math.sqrt(n)
        jt = p.jitter_tolerance * max(
            math.sqrt(estimated),
            min(10.0, estimated * total_traction / (n * n)))
        if total_traction and total_swing / total_traction > 2.0:
            if efficiency > 0.05:
                efficiency *= 0.5
            jt = max(jt, p.jitter_tolerance)
        if total_swing > 0:
            target = jt * efficiency * total_traction / total_swing
            if total_swing > jt * total_traction:
                if efficiency > 0.05:
                    efficiency *= 0.7
            elif speed < 1000:
                efficiency *= 1.3
            speed = speed + min(target - speed, 0.5 * speed)

        step = speed / (1.0 + math.sqrt(speed * total_swing / n))
        disp = step * F
        longest = float(np.linalg.norm(disp, axis=1).max()) if n else 0.0
        if longest > p.max_step:
            disp *= p.max_step / longest
        X = X + disp
        prev = F
        _check_finite(X, "fa2", it)
    return Layout(X, engine=Engine.FA2.label, seed=init.seed,
                  iterations=p.iterations)


def _pairwise(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def stress_weights(D, pair_weights=None):
    finite = np.isfinite(D) & (D > 0)
    W = np.zeros_like(D)
    W[finite] = D[finite] ** -2.0
    if pair_weights:
        for (i, j), f in pair_weights.items():
            W[i, j] *= f
            W[j, i] *= f
    return W


def stress(X, D, W=None):
    X = np.asarray(getattr(X, "coords", X), dtype=float)
    D = getattr(D, "d", D)
    if W is None:
        W = stress_weights(D)
    Df = np.where(np.isfinite(D), D, 0.0)
    terms = W * (_pairwise(X) - Df) ** 2
    return float(np.triu(terms, 1).sum())


def _guttman(X, W, Df, Vp):
    dist = _pairwise(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(dist > 0, -W * Df / dist, 0.0)
    np.fill_diagonal(B, 0.0)
    np.fill_diagonal(B, -B.sum(axis=1))
    return Vp @ (B @ X)


def _relaxed(X, G, sigma, D, W):
    """
    Walks on along the Guttman direction ``G - X``, doubling the step while
    stress keeps dropping. The result is never worse than ``G``.
    """
    step = G - X
    best = G
    alpha = 2.0
    while alpha <= MAX_RELAXATION and sigma > 0:
        Y = X + alpha * step
        tried = stress(Y, D, W)
        if not tried < sigma:
            break
        best, sigma = Y, tried
        alpha *= 2.0
    return best, sigma


def stress_majorization(g, init, p=SmParams(), pair_weights=None):
    """
    Minimises weighted stress by repeated Guttman transforms. Target
    distances are weighted shortest-path lengths, pair weights their inverse
    squares, optionally multiplied by ``pair_weights``.

    Near a collinear optimum the plain transform only converges sublinearly,
    so with ``p.relaxed`` each step is stretched along its own direction for
    as long as that lowers stress.
    """
    D = np.array(shortest_path_lengths(g, DistanceMode.WEIGHTED).d)
    W = stress_weights(D, pair_weights)
    Df = np.where(np.isfinite(D), D, 0.0)
    V = -W.copy()
    np.fill_diagonal(V, W.sum(axis=1))
    Vp = np.linalg.pinv(V)

    X = np.array(init.coords, dtype=float)
    sigma = stress(X, D, W)
    history = [sigma]
    it = 0
    while it < p.iterations and sigma > 0:
        it += 1
        G = _guttman(X, W, Df, Vp)
        _check_finite(G, "stress majorization", it)
        updated = stress(G, D, W)
        if p.relaxed:
            G, updated = _relaxed(X, G, updated, D, W)
        X = G
        history.append(updated)
        converged = (sigma - updated) / sigma < p.tolerance
        sigma = updated
        if converged:
            break
    return Layout(X, engine=Engine.SM.label, seed=init.seed, iterations=it,
                  stress_history=history)


def _engine(x):
    return x if isinstance(x, Engine) else Engine.parse(x)


def forest_seed(seed):
    "Seed of the outlier model; shared by every engine drawing the graph."
    return uutil.derive_seed(seed, "forest")


def run_engine(engine, g, init, fa2_params=Fa2Params(), sm_params=SmParams(),
               pair_weights=None):
    engine = _engine(engine)
    if engine is Engine.FA2:
        return fa2(g, init, fa2_params)
    return stress_majorization(g, init, sm_params, pair_weights)


def _crossings_or_inf(g, layout):
    try:
        return count_crossings(g, layout)
    except DegenerateGeometry:
        return math.inf


def best_of_k(run, g, seeds):
    """
    Runs ``run(g, init)`` from a random layout per seed and keeps the drawing
    with the fewest crossings; ties go to the lowest seed.
    """
    seeds = sorted(seeds)
    if not seeds:
        raise ValueError("best_of_k needs at least one seed")
    best = None
    best_nc = None
    for seed in seeds:
        layout = run(g, random_layout(g.n, seed))
        nc = _crossings_or_inf(g, layout)
        log.debug("seed {}: {} crossings", seed, nc)
        if best is None or nc < best_nc:
            best, best_nc = layout, nc
    return best


@attr.s(frozen=True)
class SuiteParams:
    restarts = attr.ib(default=DEFAULT_RESTARTS)
    k = attr.ib(default=weighting.DEFAULT_K)
    forest = attr.ib(factory=weighting.ForestParams)
    fixed_weight = attr.ib(default=weighting.FIXED_WEIGHT)
    fa2 = attr.ib(factory=Fa2Params)
    sm = attr.ib(factory=SmParams)
    extra_variants = attr.ib(default=(), converter=tuple)
    aggregates = attr.ib(default=("min", "max", "mean"), converter=tuple)

    @restarts.validator
    def _check_restarts(self, attribute, value):
        if value < 1:
            raise ValueError(f"restarts must be positive, not {value}")


def suite_variants(augmented, extra=(), aggregates=None):
    variants = Variant.standard(augmented)
    if aggregates is not None:
        variants = [x for x in variants
                    if not x.heuristic or x.aggregate in aggregates]
    for x in extra:
        x = Variant.parse(x) if isinstance(x, str) else x
        if x.needs_augmentation and not augmented:
            continue
        if x not in variants:
            variants.append(x)
    return variants


def draw_variant(variant, g_planar, g_aug, engine, seed,
                 params=SuiteParams(), footprints=None, orig=None):
    """
    Draws one variant. ``orig`` must be passed for on_top, which reuses the
    orig coordinates on the augmented graph.
    """
    engine = _engine(engine)
    target = g_aug if g_aug is not None else g_planar
    seeds = [uutil.derive_seed(seed, engine.label, variant.label, i)
             for i in range(params.restarts)]
    fa2_params = params.fa2
    pair_weights = None

    if variant is Variant.ORIG:
        drawn = g_planar
    elif variant is Variant.ON_TOP:
        if orig is None:
            raise ValueError("on_top needs the orig layout")
        return attr.evolve(orig, variant=variant.label)
    elif variant is Variant.REDRAW:
        drawn = g_aug
    elif variant.heuristic:
        result = weighting.weight_heuristic(
            target, params.k, variant.aggregate, params.forest,
            seed=forest_seed(seed), footprints=footprints)
        drawn = result.graph
    elif variant is Variant.H_NB:
        nb = weighting.weight_neighborhood(target)
        if engine is Engine.FA2:
            drawn = target.with_weights(nb)
            fa2_params = attr.evolve(fa2_params, weight_influence=1.0)
        else:
            drawn = target
            pair_weights = nb
    elif variant is Variant.H_FIXED:
        fixed = weighting.weight_fixed(g_aug, params.fixed_weight)
        if engine is Engine.FA2:
            drawn = fixed
            fa2_params = attr.evolve(fa2_params, weight_influence=1.0)
        else:
            # the attraction multiplier becomes a desired length
            drawn = fixed.with_weights({e.pair: 1.0 / e.w
                                        for e in fixed.edges})
    else:
        raise ValueError(f"unknown variant {variant}")

    def run(g, init):
        return run_engine(engine, g, init, fa2_params, params.sm,
                          pair_weights)

    layout = best_of_k(run, drawn, seeds)
    return attr.evolve(layout, variant=variant.label)


def layout_suite(g_planar, g_aug, engine, seed, params=SuiteParams(),
                 footprints=None):
    """
    Draws every applicable variant of one graph. ``g_aug`` is None for
    families without augmentation; the heuristics then act on ``g_planar``.
    """
    out = {}
    for variant in suite_variants(g_aug is not None, params.extra_variants,
                                  params.aggregates):
        out[variant] = draw_variant(variant, g_planar, g_aug, engine, seed,
                                    params, footprints,
                                    orig=out.get(Variant.ORIG))
    return out


def format_layout(layout):
    lines = [f"# {layout.engine} {layout.variant} {layout.seed} "
             f"{layout.iterations}", str(layout.n)]
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in layout.coords)
    return "\n".join(lines) + "\n"


def write_layout(layout, fpath):
    uutil.write_atomic(fpath, format_layout(layout))


def parse_layout(text, filename=None):
    provenance = {}
    rows = []
    n = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            fields = s[1:].split()
            if len(fields) == 4 and not provenance:
                provenance = {
                    "engine": fields[0],
                    "variant": fields[1],
                    "seed": None if fields[2] == "None" else int(fields[2]),
                    "iterations": int(fields[3]),
                }
            continue
        try:
            if n is None:
                n = int(s)
                continue
            x, y = (float(v) for v in s.split())
        except ValueError:
            raise ParseError(f"bad layout line {s!r}", lineno,
                             filename) from None
        rows.append((x, y))
    if n is None or len(rows) != n:
        raise ParseError(f"expected {n} coordinate lines, got {len(rows)}",
                         None, filename)
    return Layout(np.array(rows).reshape(-1, 2), **provenance)


def read_layout(fpath):
    with open(fpath, "r") as f:
        return parse_layout(f.read(), filename=os.fspath(fpath))
