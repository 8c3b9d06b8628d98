"""Stdio request loop speaking the line-delimited JSON wire protocol."""

from __future__ import annotations

import argparse
import json
import sys

from .config import config_from_wire
from .data import default_corpus_path, load_corpus
from .train import TrainError, train

PROTOCOL_VERSION = 1


def _emit(obj: dict) -> None:
    print(json.dumps(obj), flush=True)


def _error(request_id, message: str) -> None:
    _emit({"type": "result", "id": request_id, "status": "error", "message": message})


def serve(corpus, batch_size: int, stdin=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    _emit({"type": "hello", "protocol": PROTOCOL_VERSION})
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("request must be a JSON object")
        except ValueError:
            _error(None, f"bad request line: {line[:60]}")
            continue
        kind = msg.get("type")
        if kind == "shutdown":
            return 0
        if kind != "eval":
            continue
        request_id = msg.get("id")
        try:
            cfg = config_from_wire(
                msg.get("config") or {},
                seed=msg.get("seed", 0),
                epochs=msg.get("epochs", 5),
            )
            metrics = train(cfg, corpus, batch_size=batch_size)
        except (ValueError, TrainError) as exc:
            _error(request_id, str(exc))
            continue
        numeric = {
            k: float(v) for k, v in metrics.items()
            if isinstance(v, (int, float)) and not isinstance(v, bool)
        }
        meta = {k: v for k, v in metrics.items() if k not in numeric}
        _emit({
            "type": "result", "id": request_id, "status": "ok",
            "metrics": numeric, "meta": meta,
        })
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lm-worker")
    parser.add_argument("--corpus", default=None, help="corpus file (default: bundled)")
    parser.add_argument("--vocab-cap", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=16)
    args = parser.parse_args(argv)

    path = args.corpus or default_corpus_path()
    try:
        corpus = load_corpus(path, vocab_cap=args.vocab_cap)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return serve(corpus, batch_size=args.batch_size)


if __name__ == "__main__":
    sys.exit(main())
