"""Serve the bridge: toxsteer-bridge --lm ngram:model.json --toxicity lexicon:lex.tsv"""

from __future__ import annotations

import argparse

import uvicorn

from .app import BridgeConfig, create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toxsteer-bridge",
                                     description="model-serving sidecar for toxsteer")
    parser.add_argument("--lm", default=None, help="ngram:PATH | hf:MODEL")
    parser.add_argument("--toxicity", default=None, help="lexicon:PATH | hf:MODEL")
    parser.add_argument("--metric", default=None, help="overlap: | hf:MODEL")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8321)
    parser.add_argument("--max-batch", type=int, default=8)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = BridgeConfig(lm=args.lm, toxicity=args.toxicity, metric=args.metric,
                          host=args.host, port=args.port, max_batch=args.max_batch)
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
