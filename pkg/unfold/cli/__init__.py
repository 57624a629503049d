# SPDX-License-Identifier: AGPL-3.0-only
import argparse
import os
import os.path as path

import valideer as V
from logbook import DEBUG, INFO, Logger, StderrHandler

import unfold.experiment as exp_mod
import unfold.util as uutil
from unfold.errors import UnfoldError

log = Logger("unfold.cli")
argparser = argparse.ArgumentParser(
    description="weighted layouts of nearly planar graphs"
)
argparser.add_argument(
    "--verbose",
    help="log debugging output",
    dest="verbose",
    default=False,
    action=uutil.TristateBooleanAction
)
subcommands = argparser.add_subparsers(
    dest="command"
)


def _add_experiment_arguments(parser):
    parser.add_argument(
        "--config",
        help="experiment config (default: $UNFOLD_CFG_DIR/experiment.toml)",
        default=None
    )
    parser.add_argument(
        "--out",
        help="output directory, overriding the config",
        default=None
    )
    parser.add_argument(
        "--jobs",
        help="worker processes per stage",
        type=int,
        default=1
    )
    parser.add_argument(
        "--resume",
        help="keep outputs that already exist (default)",
        dest="resume",
        default=True,
        action=uutil.TristateBooleanAction
    )


def _experiment(args):
    cfg = args.config
    if cfg is None:
        cfg_dir = os.getenv("UNFOLD_CFG_DIR", ".")
        cfg = path.join(cfg_dir, "experiment.toml")
    if args.jobs < 1:
        raise V.ValidationError(f"--jobs must be positive, not {args.jobs}")
    return exp_mod.Experiment.from_config(cfg, out=args.out, jobs=args.jobs,
                                          resume=args.resume)


def _run(args, stage, *extra):
    exp = _experiment(args)
    try:
        print(stage(exp, *extra))
    finally:
        if exp.timings:
            exp.write_timings()


def do_generate(args):
    _run(args, exp_mod.cmd_generate)


do_generate.parser = subcommands.add_parser(
    "generate",
    help="generate the datasets and their manifests"
)


def do_layout(args):
    _run(args, exp_mod.cmd_layout)


do_layout.parser = subcommands.add_parser(
    "layout",
    help="draw every variant of every generated graph"
)


def do_evaluate(args):
    _run(args, exp_mod.cmd_evaluate)


do_evaluate.parser = subcommands.add_parser(
    "evaluate",
    help="compute quality metrics of every layout"
)


def do_compare(args):
    _run(args, exp_mod.cmd_compare, args.records)


do_compare.parser = subcommands.add_parser(
    "compare",
    help="test the heuristics against their baselines"
)
do_compare.parser.add_argument(
    "--records",
    help="records table to read (default: <out>/records.csv)",
    default=None
)


def do_render(args):
    if args.graph is not None:
        if args.layout is None or args.output is None:
            raise V.ValidationError("rendering one drawing needs --layout "
                                    "and --output")
        print(exp_mod.render_file(args.graph, args.layout, args.output,
                                  title=args.title))
        return
    _run(args, exp_mod.cmd_render)


do_render.parser = subcommands.add_parser(
    "render",
    help="draw layouts as SVG, one file or the whole experiment"
)
do_render.parser.add_argument("--graph", help="graph file", default=None)
do_render.parser.add_argument("--layout", help="layout file", default=None)
do_render.parser.add_argument("--output", help="SVG to write", default=None)
do_render.parser.add_argument("--title", help="drawing title", default=None)


def do_pipeline(args):
    _run(args, exp_mod.cmd_pipeline)


do_pipeline.parser = subcommands.add_parser(
    "pipeline",
    help="generate, layout, evaluate, compare and render in sequence"
)

for _cmd in (do_generate, do_layout, do_evaluate, do_compare, do_render,
             do_pipeline):
    _add_experiment_arguments(_cmd.parser)
    _cmd.parser.set_defaults(func=_cmd)


def main(argv=None):
    parsed = argparser.parse_args(argv)
    if not parsed.command:
        argparser.print_help()
        return 1

    StderrHandler(level=DEBUG if parsed.verbose else INFO).push_application()
    try:
        parsed.func(parsed)
    except UnfoldError as e:
        log.error("{}: {}", e.code, e)
        return 1
    except V.ValidationError as e:
        log.error("invalid configuration: {}", e)
        return 1
    except FileNotFoundError as e:
        log.error("{}", e)
        return 1
    return 0
