"""Command line: initialize a base model, fine-tune per-class models, and
serve them over the wire protocol."""

import argparse
import json
import sys

from .model import finetune, init_base
from .server import ServerConfig, discover_model_dirs, serve


def _read_jsonl_texts(path, label=None):
    texts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            rec = json.loads(raw)
            if "text" not in rec:
                raise ValueError(f"{path}:{lineno}: record missing 'text'")
            if label is None or rec.get("label") == label:
                texts.append(rec["text"])
    if not texts:
        raise ValueError(f"{path}: no matching records" +
                         (f" for class {label!r}" if label else ""))
    return texts


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="genserver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-base", help="random base model over a corpus vocabulary")
    p.add_argument("--corpus", required=True, help="JSONL corpus supplying the vocabulary")
    p.add_argument("--output", required=True)
    p.add_argument("--embed-dim", type=int, default=32)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("finetune", help="fine-tune a base model on one class")
    p.add_argument("--corpus", required=True)
    p.add_argument("--class", dest="label", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("serve", help="serve fine-tuned models")
    p.add_argument("--models-dir", required=True,
                   help="directory with one model subdirectory per class")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8901)
    p.add_argument("--max-concurrent", type=int, default=4)

    args = parser.parse_args(argv)
    try:
        if args.command == "init-base":
            out = init_base(_read_jsonl_texts(args.corpus), args.output,
                            embed_dim=args.embed_dim, hidden_dim=args.hidden_dim,
                            seed=args.seed)
            print(f"initialized base model -> {out}")
        elif args.command == "finetune":
            out = finetune(_read_jsonl_texts(args.corpus, args.label), args.base,
                           steps=args.steps, out_dir=args.output, lr=args.lr,
                           seed=args.seed)
            print(f"fine-tuned {args.steps} steps for class {args.label!r} -> {out}")
        else:
            serve(ServerConfig(model_dirs=discover_model_dirs(args.models_dir),
                               host=args.host, port=args.port,
                               max_concurrent=args.max_concurrent))
    except (ValueError, OSError) as e:
        print(f"genserver: error: {e}", file=sys.stderr)
        return 1
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
