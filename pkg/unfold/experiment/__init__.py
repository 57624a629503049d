# SPDX-License-Identifier: AGPL-3.0-only
"""
End-to-end experiment: dataset generation, layout suites, metric records,
paired comparisons and drawings, all driven by one TOML config.

Output tree::

    dataset/<dataset>/<id>.graph, <id>.aug.graph, manifest.toml
    weights/<dataset>/<id>.footprints.msgpack, <id>.<M>.report.csv
    layouts/<dataset>/<id>/<engine>.<variant>.layout
    figures/<dataset>/<id>/<engine>.<variant>.svg, <engine>.summary.svg
    records.csv, comparison.csv, timings.csv
"""
import contextlib
import os.path as path
import re
import time

import attr
import humanize
import numpy as np
import pandas as pd
import toml
import valideer as V
from logbook import Logger

import unfold.generators as gens
import unfold.layout as ulayout
import unfold.metrics as metrics
import unfold.render as render
import unfold.stats as stats
import unfold.util as uutil
import unfold.weighting as weighting
from unfold.errors import IncompleteRecords, MissingLayout
from unfold.generators import Family
from unfold.messages import Engine, FootprintMessage, Variant
from unfold.paths import Footprint, all_footprints

log = Logger("unfold.experiment")

RECORD_COLUMNS = ["dataset", "graph_id", "engine", "variant", "nc",
                  "ang_res", "cros_res", "ps"]
COMPARISON_COLUMNS = ["dataset", "engine", "metric", "variant_a",
                      "variant_b", "median_a", "median_b", "W", "p",
                      "significant"]
METRICS = ("nc", "ang_res", "cros_res", "ps")
DEFAULT_AUGMENT = 0.1
DEFAULT_OUT = "results"
DATASET_REGEX = re.compile(r"^[a-zA-Z][-_a-zA-Z0-9]{0,30}$")

with V.parsing(required_properties=True,
               additional_properties=V.Object.REMOVE):
    @V.accepts(x=V.AnyOf("integer", ["integer"]))
    def _range_adaptor(x):
        if isinstance(x, int):
            x = [x, x]
        if len(x) != 2 or not 1 <= x[0] <= x[1]:
            raise V.ValidationError(f"{x!r} is not a [low, high] range")
        return tuple(x)

    @V.accepts(x=V.AnyOf("string", ["string"]))
    def _engine_adaptor(x):
        xs = [x] if isinstance(x, str) else x
        return tuple(Engine.parse(e) for e in xs)

    @V.accepts(x=V.AnyOf("string", ["string"]))
    def _aggregate_adaptor(x):
        xs = [x] if isinstance(x, str) else x
        return tuple(weighting.Aggregate(m).label for m in xs)

    @V.accepts(x=["string"])
    def _variant_adaptor(x):
        return tuple(Variant.parse(v) for v in x)

    @V.accepts(x="string")
    def _family_adaptor(x):
        return Family.parse(x)

    DATASET_VALIDATOR = V.parse({
        "name": V.AllOf("string", DATASET_REGEX),
        "family": V.AdaptBy(_family_adaptor),
        "seed": "integer",
        "?count": "integer",
        "?rows": V.AdaptBy(_range_adaptor),
        "?cols": V.AdaptBy(_range_adaptor),
        "?n": V.AdaptBy(_range_adaptor),
        "?m_ratio": "number",
        "?augment": V.Nullable("number", DEFAULT_AUGMENT),
        "?files": ["string"],
        "?extra_variants": V.Nullable(V.AdaptBy(_variant_adaptor), ()),
    })

    CONFIG_VALIDATOR = V.parse({
        "seed": "integer",
        "?out": V.Nullable("string", DEFAULT_OUT),
        "?restarts": V.Nullable("integer", ulayout.DEFAULT_RESTARTS),
        "?engines": V.AdaptBy(_engine_adaptor),
        "?heuristic": {
            "?k": "integer",
            "?aggregates": V.AdaptBy(_aggregate_adaptor),
            "?trees": "integer",
            "?subsample": "integer",
            "?threshold": "number",
            "?fixed_weight": "number",
        },
        "?fa2": {
            "?iterations": "integer",
            "?repulsion": "number",
            "?gravity": "number",
        },
        "?sm": {
            "?iterations": "integer",
            "?tolerance": "number",
            "?relaxed": "boolean",
        },
        "dataset": [DATASET_VALIDATOR],
    })


def _check_dataset(ds):
    family = ds["family"]
    if family is Family.ROME:
        if not ds.get("files"):
            raise V.ValidationError(f"dataset {ds['name']}: rome datasets "
                                    "list their graph files")
        if ds.get("count", len(ds["files"])) != len(ds["files"]):
            raise V.ValidationError(f"dataset {ds['name']}: count does not "
                                    "match the number of files")
        return
    if ds.get("count", 0) < 1:
        raise V.ValidationError(f"dataset {ds['name']}: count must be "
                                "positive")
    needed = ("rows", "cols") if family is Family.GRID else ("n",)
    for key in needed:
        if key not in ds:
            raise V.ValidationError(f"dataset {ds['name']}: "
                                    f"{family.label} needs {key!r}")
    if not 0 <= ds.get("augment", DEFAULT_AUGMENT) < 1:
        raise V.ValidationError(f"dataset {ds['name']}: augment must lie in "
                                "[0, 1)")


def load_config(fpath):
    with open(fpath, "r") as fcfg:
        cfg = CONFIG_VALIDATOR.validate(toml.load(fcfg))
    names = [ds["name"] for ds in cfg["dataset"]]
    if len(set(names)) != len(names):
        raise V.ValidationError("dataset names must be unique")
    for ds in cfg["dataset"]:
        _check_dataset(ds)
    return cfg


@attr.s
class Experiment:
    cfg = attr.ib(repr=False)
    out = attr.ib()
    jobs = attr.ib(default=1)
    resume = attr.ib(default=True)
    # relative rome file names resolve against this directory
    base_dir = attr.ib(default=".")
    timings = attr.ib(factory=list, repr=False)

    @classmethod
    def from_config(cls, fpath, out=None, jobs=1, resume=True):
        cfg = load_config(fpath)
        out = out or cfg.get("out", DEFAULT_OUT)
        return cls(cfg, path.abspath(out), jobs, resume,
                   path.dirname(path.abspath(fpath)))

    @property
    def datasets(self):
        return self.cfg["dataset"]

    @property
    def engines(self):
        return self.cfg.get("engines", tuple(Engine))

    def dataset(self, name):
        for ds in self.datasets:
            if ds["name"] == name:
                return ds
        raise KeyError(name)

    def suite_params(self, ds):
        h = self.cfg.get("heuristic", {})
        fa2 = self.cfg.get("fa2", {})
        sm = self.cfg.get("sm", {})
        return ulayout.SuiteParams(
            restarts=self.cfg.get("restarts", ulayout.DEFAULT_RESTARTS),
            k=h.get("k", weighting.DEFAULT_K),
            forest=weighting.ForestParams(**{
                k: h[k] for k in ("trees", "subsample", "threshold")
                if k in h
            }),
            fixed_weight=h.get("fixed_weight", weighting.FIXED_WEIGHT),
            fa2=ulayout.Fa2Params(**fa2),
            sm=ulayout.SmParams(**sm),
            extra_variants=ds.get("extra_variants", ()),
            aggregates=h.get("aggregates", ("min", "max", "mean")),
        )

    def variants(self, ds):
        params = self.suite_params(ds)
        return ulayout.suite_variants(ds["family"].augmented,
                                      params.extra_variants,
                                      params.aggregates)

    def join(self, *parts):
        return path.join(self.out, *parts)

    def graph_path(self, name, gid, augmented=False):
        suffix = ".aug.graph" if augmented else ".graph"
        return self.join("dataset", name, gid + suffix)

    def manifest_path(self, name):
        return self.join("dataset", name, "manifest.toml")

    def layout_path(self, name, gid, engine, variant):
        return self.join("layouts", name, gid,
                         f"{engine.label}.{variant.label}.layout")

    def manifest(self, name):
        return gens.read_manifest(self.manifest_path(name))

    def load_graphs(self, name, gid):
        """
        Returns ``(G, G_aug)``; ``G_aug`` is None for datasets without an
        augmentation.
        """
        g = gens.load_graph_file(self.graph_path(name, gid))
        if not self.dataset(name)["family"].augmented:
            return g, None
        return g, gens.load_graph_file(self.graph_path(name, gid, True))

    def skip(self, *fpaths):
        return self.resume and all(path.exists(f) for f in fpaths)

    @contextlib.contextmanager
    def stage(self, name):
        start = time.monotonic()
        log.info("stage {} started", name)
        yield
        elapsed = time.monotonic() - start
        log.info("stage {} finished in {}", name,
                 humanize.naturaldelta(elapsed))
        self.timings.append({"stage": name, "seconds": elapsed})

    def write_timings(self):
        fpath = self.join("timings.csv")
        fresh = pd.DataFrame(self.timings, columns=["stage", "seconds"])
        if path.exists(fpath):
            old = pd.read_csv(fpath)
            old = old[~old["stage"].isin(fresh["stage"])]
            fresh = pd.concat([old, fresh], ignore_index=True)
        uutil.write_atomic(fpath, fresh.to_csv(index=False))


def graph_seed(cfg, ds, index):
    return uutil.derive_seed(cfg["seed"], ds["name"], ds["seed"], index)


@attr.s(frozen=True)
class _GenerateTask:
    exp = attr.ib()
    ds = attr.ib()

    def __call__(self, index):
        exp, ds = self.exp, self.ds
        family = ds["family"]
        gid = f"{index:03d}"
        seed = graph_seed(exp.cfg, ds, index)
        gpath = exp.graph_path(ds["name"], gid)
        apath = exp.graph_path(ds["name"], gid, True)
        entry = {"id": gid, "family": family.label, "seed": seed,
                 "graph": path.basename(gpath)}

        if family is Family.ROME:
            source = ds["files"][index]
            entry["source"] = source
            if not exp.skip(gpath):
                g = gens.load_graph_file(path.join(exp.base_dir, source))
                gens.write_graph_file(g, gpath)
        else:
            rng = np.random.default_rng(uutil.derive_seed(seed, "size"))
            sizes = {}
            if family is Family.GRID:
                for key in ("rows", "cols"):
                    lo, hi = ds[key]
                    sizes[key] = int(rng.integers(lo, hi + 1))
            else:
                lo, hi = ds["n"]
                sizes["n"] = int(rng.integers(lo, hi + 1))
                if family is Family.SPARSE and "m_ratio" in ds:
                    sizes["m"] = gens.fraction_count(ds["m_ratio"],
                                                     sizes["n"])
            entry.update(sizes)
            spec = gens.GenSpec(family, seed, augment_fraction=ds.get(
                "augment", DEFAULT_AUGMENT), **sizes)
            outputs = (gpath, apath) if family.augmented else (gpath,)
            if not exp.skip(*outputs):
                g, g_aug = gens.generate(spec)
                gens.write_graph_file(g, gpath)
                if g_aug is not None:
                    gens.write_graph_file(g_aug, apath)
            if family.augmented:
                entry["augmented"] = path.basename(apath)

        g = gens.load_graph_file(gpath)
        entry.update(n=g.n, m=g.m)
        if family.augmented:
            entry["aug_edges"] = len(gens.load_graph_file(apath).aug_edges())
        return entry


def cmd_generate(exp):
    with exp.stage("generate"):
        for ds in exp.datasets:
            count = len(ds["files"]) if ds["family"] is Family.ROME \
                else ds["count"]
            entries = uutil.run_parallel(_GenerateTask(exp, ds),
                                         range(count), jobs=exp.jobs)
            gens.write_manifest(entries, exp.manifest_path(ds["name"]))
            log.info("dataset {}: {} graphs", ds["name"], len(entries))
    return exp.join("dataset")


def load_footprints(exp, name, gid, g):
    """
    Footprints of ``g`` (the graph the heuristics weight), cached per graph
    as a msgpack message tied to the graph file digest.
    """
    ds = exp.dataset(name)
    gpath = exp.graph_path(name, gid, ds["family"].augmented)
    digest = uutil.digest_path(gpath)
    cache = exp.join("weights", name, f"{gid}.footprints.msgpack")
    if path.exists(cache):
        with open(cache, "rb") as f:
            msg = FootprintMessage.unpack(f.read())
        if msg.graph_digest == digest:
            return {e: Footprint(e, ls) for e, ls in msg.as_mapping().items()}
        log.warning("{}: stale footprint cache, recomputing", cache)
    footprints = all_footprints(g)
    msg = FootprintMessage.from_footprints(digest, g.n, footprints)
    uutil.write_atomic(cache, msg.pack())
    return footprints


@attr.s(frozen=True)
class _LayoutTask:
    exp = attr.ib()
    ds = attr.ib()

    def __call__(self, entry):
        exp, ds = self.exp, self.ds
        name, gid = ds["name"], entry["id"]
        g, g_aug = exp.load_graphs(name, gid)
        target = g_aug if g_aug is not None else g
        params = exp.suite_params(ds)
        variants = exp.variants(ds)
        footprints = None

        def get_footprints():
            nonlocal footprints
            if footprints is None:
                footprints = load_footprints(exp, name, gid, target)
            return footprints

        for M in params.aggregates:
            report = exp.join("weights", name, f"{gid}.{M}.report.csv")
            if exp.skip(report):
                continue
            result = weighting.weight_heuristic(
                target, params.k, M, params.forest,
                seed=ulayout.forest_seed(entry["seed"]),
                footprints=get_footprints())
            weighting.write_weighting_report(result, report)

        written = 0
        for engine in exp.engines:
            orig = None
            for variant in variants:
                fpath = exp.layout_path(name, gid, engine, variant)
                if exp.skip(fpath):
                    if variant is Variant.ORIG:
                        orig = ulayout.read_layout(fpath)
                    continue
                try:
                    layout = ulayout.draw_variant(
                        variant, g, g_aug, engine, entry["seed"], params,
                        get_footprints() if variant.heuristic else None,
                        orig)
                except Exception:
                    log.exception("{}/{}: drawing {} under {} failed", name,
                                  gid, variant.label, engine.label)
                    raise
                ulayout.write_layout(layout, fpath)
                written += 1
                if variant is Variant.ORIG:
                    orig = layout
        log.debug("{}/{}: wrote {} layouts", name, gid, written)
        return written


def cmd_layout(exp):
    with exp.stage("layout"):
        for ds in exp.datasets:
            entries = exp.manifest(ds["name"])
            counts = uutil.run_parallel(_LayoutTask(exp, ds), entries,
                                        jobs=exp.jobs)
            log.info("dataset {}: wrote {} layouts", ds["name"],
                     sum(counts))
    return exp.join("layouts")


def _read_required_layout(exp, name, gid, engine, variant):
    fpath = exp.layout_path(name, gid, engine, variant)
    if not path.exists(fpath):
        raise MissingLayout(f"no {variant.label} layout for {name}/{gid} "
                            f"under {engine.label}: {fpath}")
    return ulayout.read_layout(fpath)


@attr.s(frozen=True)
class _EvaluateTask:
    exp = attr.ib()
    ds = attr.ib()

    def __call__(self, entry):
        exp, ds = self.exp, self.ds
        name, gid = ds["name"], entry["id"]
        g, g_aug = exp.load_graphs(name, gid)
        rows = []
        for engine in exp.engines:
            reference = _read_required_layout(exp, name, gid, engine,
                                              Variant.ORIG)
            for variant in exp.variants(ds):
                layout = _read_required_layout(exp, name, gid, engine,
                                               variant)
                drawn = g if variant.drawn_graph == "planar" or g_aug is None \
                    else g_aug
                report = metrics.evaluate(drawn, layout, reference)
                rows.append({"dataset": name, "graph_id": gid,
                             "engine": engine.label,
                             "variant": variant.label, **report.as_row()})
        return rows


def cmd_evaluate(exp):
    with exp.stage("evaluate"):
        rows = []
        for ds in exp.datasets:
            entries = exp.manifest(ds["name"])
            for chunk in uutil.run_parallel(_EvaluateTask(exp, ds), entries,
                                            jobs=exp.jobs):
                rows.extend(chunk)
        records = pd.DataFrame(rows, columns=RECORD_COLUMNS)
        records["nc"] = records["nc"].astype("int64")
        fpath = exp.join("records.csv")
        uutil.write_atomic(fpath, records.to_csv(index=False,
                                                 float_format="%.17g"))
        log.info("wrote {} metric records", len(records))
    return fpath


def read_records(fpath):
    return pd.read_csv(fpath, dtype={"graph_id": str, "dataset": str,
                                     "engine": str, "variant": str})


def baseline(family):
    "Variant the heuristics are tested against."
    return Variant.REDRAW if family.augmented else Variant.ORIG


def _check_complete(exp, records, ds):
    ids = {e["id"] for e in exp.manifest(ds["name"])}
    sub = records[records["dataset"] == ds["name"]]
    for engine in exp.engines:
        for variant in exp.variants(ds):
            have = set(sub[(sub["engine"] == engine.label)
                           & (sub["variant"] == variant.label)]["graph_id"])
            if have != ids:
                raise IncompleteRecords(
                    f"{ds['name']}/{engine.label}/{variant.label}: records "
                    f"for {len(have)} of {len(ids)} graphs")


def cmd_compare(exp, records_path=None):
    with exp.stage("compare"):
        records = read_records(records_path or exp.join("records.csv"))
        rows = []
        for ds in exp.datasets:
            _check_complete(exp, records, ds)
            base = baseline(ds["family"])
            candidates = [v for v in exp.variants(ds)
                          if v.heuristic or v in (Variant.H_NB,
                                                  Variant.H_FIXED)]
            for engine in exp.engines:
                for metric in METRICS:
                    for variant in candidates:
                        c = stats.compare(records, ds["name"], engine.label,
                                          metric, variant.label, base.label)
                        rows.append(c.as_row())
        table = pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
        fpath = exp.join("comparison.csv")
        uutil.write_atomic(fpath, table.to_csv(index=False,
                                               float_format="%.17g"))
        significant = int(table["significant"].sum())
        log.info("{} of {} comparisons significant at {}", significant,
                 len(table), stats.ALPHA)
    return fpath


def render_file(graph_file, layout_file, out_file, title=None):
    g = gens.load_graph_file(graph_file)
    layout = ulayout.read_layout(layout_file)
    render.write_svg(render.render_svg(g, layout, title=title), out_file)
    return out_file


@attr.s(frozen=True)
class _RenderTask:
    exp = attr.ib()
    ds = attr.ib()

    def __call__(self, entry):
        exp, ds = self.exp, self.ds
        name, gid = ds["name"], entry["id"]
        g, g_aug = exp.load_graphs(name, gid)
        for engine in exp.engines:
            for variant in exp.variants(ds):
                out = exp.join("figures", name, gid,
                               f"{engine.label}.{variant.label}.svg")
                if exp.skip(out):
                    continue
                drawn = g if variant.drawn_graph == "planar" or g_aug is None \
                    else g_aug
                layout = _read_required_layout(exp, name, gid, engine,
                                               variant)
                render.write_svg(render.render_svg(
                    drawn, layout, title=f"{name} {gid} {engine.label} "
                    f"{variant.label}"), out)


def cmd_render(exp):
    with exp.stage("render"):
        for ds in exp.datasets:
            name = ds["name"]
            entries = exp.manifest(name)
            uutil.run_parallel(_RenderTask(exp, ds), entries, jobs=exp.jobs)
            if not entries:
                continue
            gid = entries[0]["id"]
            g, g_aug = exp.load_graphs(name, gid)
            for engine in exp.engines:
                panels = []
                for variant in exp.variants(ds):
                    drawn = g if variant.drawn_graph == "planar" \
                        or g_aug is None else g_aug
                    panels.append((variant.label, drawn,
                                   _read_required_layout(exp, name, gid,
                                                         engine, variant)))
                render.write_svg(
                    render.render_summary(panels, f"{name} {gid} "
                                          f"{engine.pretty}"),
                    exp.join("figures", name, f"{engine.label}.summary.svg"))
    return exp.join("figures")


def cmd_pipeline(exp):
    cmd_generate(exp)
    cmd_layout(exp)
    cmd_evaluate(exp)
    cmd_compare(exp)
    cmd_render(exp)
    return exp.out
