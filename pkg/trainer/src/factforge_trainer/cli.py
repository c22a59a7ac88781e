"""Command line for the training bridge: pretrain, finetune, predict."""

from __future__ import annotations

import argparse
import sys

from .errors import TrainerError
from .spec import TrainSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factforge-trainer")
    commands = parser.add_subparsers(dest="command", required=True)

    pretrain = commands.add_parser("pretrain", help="masked-LM pretraining on a corpus file")
    pretrain.add_argument("--corpus", required=True)
    pretrain.add_argument("--out", required=True)
    pretrain.add_argument("--base-checkpoint", default="tiny")
    pretrain.add_argument("--epochs", type=int, default=None)
    pretrain.add_argument("--learning-rate", type=float, default=None)
    pretrain.add_argument("--seed", type=int, default=0)

    finetune = commands.add_parser("finetune", help="fine-tune a checkpoint on labeled pairs")
    finetune.add_argument("--checkpoint", required=True)
    finetune.add_argument("--train", required=True)
    finetune.add_argument("--dev", required=True)
    finetune.add_argument("--out", required=True)
    finetune.add_argument("--learning-rate", type=float, default=None)
    finetune.add_argument("--seed", type=int, default=0)

    predict = commands.add_parser("predict", help="write a predictions file for a pairs file")
    predict.add_argument("--model", required=True)
    predict.add_argument("--pairs", required=True)
    predict.add_argument("--out", required=True)

    return parser


def run(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "pretrain":
        from .pretrain import pretrain_mlm

        overrides = {"base_checkpoint": ns.base_checkpoint}
        if ns.epochs is not None:
            overrides["pretrain_epochs"] = ns.epochs
        spec = TrainSpec(**overrides)
        out = pretrain_mlm(
            ns.corpus, spec, ns.out, seed=ns.seed, learning_rate=ns.learning_rate
        )
        print(f"checkpoint written to {out}", file=sys.stderr)
    elif ns.command == "finetune":
        from .finetune import finetune_classifier

        out = finetune_classifier(
            ns.checkpoint, ns.train, ns.dev, TrainSpec(), ns.out,
            seed=ns.seed, learning_rate=ns.learning_rate,
        )
        print(f"model written to {out}", file=sys.stderr)
    else:
        from .predict import predict

        count = predict(ns.model, ns.pairs, ns.out)
        print(f"wrote {count} predictions to {ns.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except TrainerError as exc:
        print(f"factforge-trainer: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
