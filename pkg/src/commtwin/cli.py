"""Command line front end for the pipeline.

One subcommand per stage plus `run` (all stages) and `toydata` (emit the
bundled sample dataset). Exit codes: 0 success, 1 a stage failed, 2 bad
usage or configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, RunConfig, load_config
from .providers import ProviderError
from .toydata import write_toy_dataset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commtwin",
        description="Build and evaluate digital twins of online communities.")
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--workdir", help="override the configured workdir")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--offline", action="store_true",
                        help="replace every model endpoint with the offline mock")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="normalize raw posts into the workdir")
    ingest.add_argument("--posts", required=True)
    ingest.add_argument("--interactions")

    sub.add_parser("communities", help="detect communities on the interaction graph")
    sub.add_parser("curate", help="select the highest-quality original posts")
    sub.add_parser("demos", help="build instruction-tuning demonstrations")
    sub.add_parser("generate", help="generate and filter synthetic corpora")
    sub.add_parser("evaluate", help="score synthetic corpora against originals")
    sub.add_parser("screen", help="administer the eating-disorder screener")
    sub.add_parser("report", help="collate all outputs into one report")

    run = sub.add_parser("run", help="run every stage in order")
    run.add_argument("--posts", required=True)
    run.add_argument("--interactions")

    toy = sub.add_parser("toydata", help="write the bundled sample dataset")
    toy.add_argument("--out", required=True)

    return parser


def _configure(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.workdir:
        cfg.workdir = args.workdir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.offline:
        cfg.offline = True
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "toydata":
            paths = write_toy_dataset(args.out,
                                      seed=args.seed if args.seed is not None
                                      else 0)
            for name, path in paths.items():
                print(f"{name}: {path}")
            return 0
        cfg = _configure(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    providers = pipeline.ProviderSet(cfg)
    try:
        if args.command == "ingest":
            pipeline.stage_ingest(cfg, args.posts, args.interactions)
        elif args.command == "communities":
            pipeline.stage_communities(cfg)
        elif args.command == "curate":
            pipeline.stage_curate(cfg, providers)
        elif args.command == "demos":
            pipeline.stage_demos(cfg)
        elif args.command == "generate":
            pipeline.stage_generate(cfg, providers)
        elif args.command == "evaluate":
            pipeline.stage_evaluate(cfg, providers)
        elif args.command == "screen":
            pipeline.stage_screen(cfg, providers)
        elif args.command == "report":
            pipeline.stage_report(cfg)
            print(Path(cfg.workdir) / "report" / "report.md")
        elif args.command == "run":
            summary = pipeline.run_all(cfg, args.posts, args.interactions)
            print(f"completed {len(summary['stages'])} stages, "
                  f"{summary['provider_calls']} model calls")
    except (pipeline.PipelineError, ProviderError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
