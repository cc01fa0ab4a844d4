"""Command line entry point: ``angiotree prep|post|eval|graph-check``.

Exit codes: 0 success, 1 partial run (some inputs skipped), 2 config or
schema error.
"""
import argparse
import logging
import sys

from . import pipeline
from .candidates import CandidateFileError
from .config import STAGE_TABLE, ConfigError, load_config
from .evaluation import ImageMismatchError, format_table
from .tree_logic import AnatomyGraphError, load_anatomy_graph

log = logging.getLogger("angiotree")

EXIT_OK, EXIT_PARTIAL, EXIT_ERROR = 0, 1, 2


def _config(args):
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "strict_ancestry", False):
        changes["ancestry"] = "strict"
    if getattr(args, "min_area", None) is not None:
        changes["min_area"] = args.min_area
    if getattr(args, "iou", None) is not None:
        changes["iou"] = args.iou
    return cfg.replace(**changes) if changes else cfg


def cmd_prep(args):
    cfg = _config(args)
    if args.stage and args.stage not in {s.name for s in cfg.stages}:
        raise ConfigError(f"stage {args.stage!r} is not in the recipe")
    summary = pipeline.run_prep(cfg, args.input_dir, args.output_dir, stage=args.stage, jobs=args.jobs)
    print(f"wrote {len(summary.written)} files, skipped {len(summary.skipped)} inputs")
    if summary.skipped:
        for path in summary.skipped:
            print(f"  skipped: {path}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_post(args):
    cfg = _config(args)
    final, records = pipeline.run_post(cfg, args.predictions, args.output, args.log, jobs=args.jobs)
    removed = sum(len(r["events"]) for r in records)
    print(f"{len(final)} images, {sum(len(s) for s in final)} candidates kept, {removed} removed")
    return EXIT_OK


def cmd_eval(args):
    report = pipeline.run_eval(args.predictions, args.truth, args.output)
    print(format_table(report))
    return EXIT_OK


def cmd_graph_check(args):
    graph = load_anatomy_graph(args.graph)
    left = sum(1 for v in graph.vertices if graph.side(v).value == "left")
    print(f"ok: {len(graph.vertices)} segments, {len(graph.edges)} edges, roots {list(graph.roots)}, "
          f"{left} left / {len(graph.vertices) - left} right, {len(graph.families)} confusable families")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="angiotree", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline YAML (defaults built in)")
    common.add_argument("--jobs", type=int, default=1, help="images processed concurrently")

    p = sub.add_parser("prep", parents=[common], help="run the enhancement filters over a directory")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--stage", choices=sorted(STAGE_TABLE), help="write a single stage")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("post", parents=[common], help="fuse, filter and validate detector candidates")
    p.add_argument("predictions", nargs="+", help="candidate JSON files, one per ensemble member")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--log", help="removal log path (default <output>.log.json)")
    p.add_argument("--strict-ancestry", action="store_true")
    p.add_argument("--min-area", type=int)
    p.add_argument("--iou", type=float)
    p.set_defaults(func=cmd_post)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("predictions")
    p.add_argument("truth")
    p.add_argument("-o", "--output", help="write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("graph-check", help="validate an anatomy graph config")
    p.add_argument("graph", nargs="?", help="YAML file (default: packaged SYNTAX graph)")
    p.set_defaults(func=cmd_graph_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (ConfigError, CandidateFileError, AnatomyGraphError, ImageMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
