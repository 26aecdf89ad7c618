"""Trainer command line: synthesize -> train -> export."""

from __future__ import annotations

import argparse
import sys

from . import dataset, export, train


def _cmd_synthesize(args) -> int:
    manifest = dataset.synthesize_corpus(
        args.speech, args.noise, args.out, hours=args.hours, seed=args.seed,
        log=print if args.verbose else None)
    print(f"wrote {len(manifest['shards'])} shards "
          f"({manifest['frames']} frames) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    windows = dataset.window_examples(dataset.load_corpus(args.data))
    net, history = train.train_model(
        windows, epochs=args.epochs, lr=args.lr, seed=args.seed,
        batch_size=args.batch_size, log=print)
    train.save_checkpoint(net, args.out, history)
    print(f"checkpoint written to {args.out} "
          f"(holdout {history['holdout'][0]:.5f} -> "
          f"{history['holdout'][-1]:.5f})")
    return 0


def _cmd_export(args) -> int:
    data = export.export_checkpoint(train.load_checkpoint(args.ckpt),
                                    args.out)
    print(f"model written to {args.out} ({len(data)} bytes)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clearband-train")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="mix a training corpus")
    s.add_argument("--speech", required=True, help="folder of 48 kHz wavs")
    s.add_argument("--noise", required=True, help="folder of 48 kHz wavs")
    s.add_argument("--out", required=True)
    s.add_argument("--hours", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(run=_cmd_synthesize)

    t = sub.add_parser("train", help="train on a synthesized corpus")
    t.add_argument("--data", required=True)
    t.add_argument("--epochs", type=int, default=20)
    t.add_argument("--out", required=True)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--batch-size", type=int, default=10)
    t.set_defaults(run=_cmd_train)

    e = sub.add_parser("export", help="write the engine model file")
    e.add_argument("--ckpt", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(run=_cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
