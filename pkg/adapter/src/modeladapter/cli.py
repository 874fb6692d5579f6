"""Command line: serve the adapter or finetune the generator."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .backends import BackendLoadError
from .config import AdapterConfig, AdapterConfigError, load_adapter_config
from .finetune import DemonstrationError, finetune


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modeladapter",
        description="Model endpoints behind the community-twin provider "
                    "protocol.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--config", help="YAML adapter configuration")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int)
    serve.add_argument("--generator",
                       help="'tiny-base' or a saved model directory")

    tune = sub.add_parser("finetune",
                          help="adapt the generator to demonstrations")
    tune.add_argument("--demos", required=True,
                      help="JSONL of {instruction, input, output} records")
    tune.add_argument("--base", default="tiny-base")
    tune.add_argument("--out", required=True)
    tune.add_argument("--epochs", type=int, default=3)
    tune.add_argument("--batch-size", type=int, default=8)
    tune.add_argument("--lr", type=float, default=1e-2)
    tune.add_argument("--seed", type=int, default=0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            cfg = (load_adapter_config(args.config) if args.config
                   else AdapterConfig())
            if args.port is not None:
                cfg = replace(cfg, port=args.port)
            if args.generator:
                cfg = replace(cfg, generator=args.generator)
            from .service import serve

            serve(cfg, host=args.host)
        elif args.command == "finetune":
            result = finetune(args.demos, args.base, args.out,
                              epochs=args.epochs, batch_size=args.batch_size,
                              lr=args.lr, seed=args.seed)
            print(f"adapted on {result['demonstrations']} demonstrations in "
                  f"{result['steps']} steps, loss "
                  f"{result['first_loss']:.3f} -> {result['final_loss']:.3f}")
            print(result["output_dir"])
    except AdapterConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BackendLoadError, DemonstrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
