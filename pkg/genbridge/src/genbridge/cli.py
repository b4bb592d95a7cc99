"""Command line: ``genbridge finetune`` and ``genbridge serve``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import SIZE_CHECKPOINTS, TrainConfig
from .serve import Generator, serve_http, serve_pipe
from .train import finetune


def cmd_finetune(args) -> int:
    if args.config:
        config = TrainConfig.from_file(args.config)
    else:
        config = TrainConfig()
    overrides = {}
    if args.size:
        overrides["base"] = SIZE_CHECKPOINTS[args.size]
    if args.base:
        overrides["base"] = args.base
    for field in ("batch_size", "learning_rate", "epochs", "seed"):
        value = getattr(args, field)
        if value is not None:
            overrides[field] = value
    if overrides:
        config = TrainConfig.from_dict({**config.to_dict(), **overrides})
    outdir = finetune(args.pairs, config, args.out)
    print(f"checkpoint written to {outdir}")
    return 0


def cmd_serve(args) -> int:
    generator = Generator(args.checkpoint, max_new_tokens=args.max_new_tokens)
    if args.pipe:
        serve_pipe(generator)
    else:
        serve_http(generator, args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genbridge",
        description="Fine-tune a seq2seq checkpoint on narrative/target pairs "
        "and serve greedy generations over the pipe or HTTP contract.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="train on a pairs file")
    p.add_argument("--pairs", required=True, help="JSONL of id/source/target records")
    p.add_argument("--out", required=True, help="checkpoint output directory")
    p.add_argument("--config", default=None, help="flat JSON TrainConfig file")
    p.add_argument("--base", default=None, help="base checkpoint id or path")
    p.add_argument("--size", choices=sorted(SIZE_CHECKPOINTS), default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("serve", help="serve a checkpoint over the contract")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pipe", action="store_true", help="speak the contract on stdin/stdout")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8600)
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
