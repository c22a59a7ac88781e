"""Continued masked-language-model pretraining over an emitted corpus."""

from __future__ import annotations

import json
import random
from pathlib import Path

import torch
from torch import nn

from .data import IGNORE_INDEX, corpus_texts, mlm_example, pad_batch, read_corpus
from .errors import TrainerError
from .model import build_model, save_model
from .spec import TrainSpec
from .vocab import Vocab


def make_optimizer(name: str, parameters, lr: float, spec: TrainSpec):
    if name == "adam":
        return torch.optim.Adam(
            parameters,
            lr=lr,
            betas=spec.adam_betas,
            eps=spec.adam_epsilon,
            weight_decay=spec.weight_decay,
        )
    if name == "radam":
        return torch.optim.RAdam(parameters, lr=lr, weight_decay=spec.weight_decay)
    raise TrainerError(f"unknown optimizer {name!r}")


def warmup_then_linear(optimizer, total_steps: int, warmup_ratio: float):
    warmup_steps = max(1, int(total_steps * warmup_ratio))

    def factor(step: int) -> float:
        if step < warmup_steps:
            return (step + 1) / warmup_steps
        remaining = max(1, total_steps - warmup_steps)
        return max(0.0, (total_steps - step) / remaining)

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def pretrain_mlm(
    corpus_path,
    spec: TrainSpec,
    out_dir,
    *,
    seed: int = 0,
    learning_rate: float | None = None,
) -> Path:
    """Train the masked-language objective on a corpus file.

    Returns the checkpoint directory (model weights, vocabulary, and a
    per-epoch training-loss log). ``learning_rate`` overrides the spec
    value for smoke runs; everything else comes from ``spec``.
    """
    examples = read_corpus(corpus_path)
    vocab = Vocab.from_texts(corpus_texts(corpus_path))
    model = build_model(spec.base_checkpoint, len(vocab))
    max_len = min(spec.max_sequence_length, model.config["max_len"])

    encoded = []
    for example in examples:
        input_ids, labels = mlm_example(example, vocab, max_len)
        if any(l != IGNORE_INDEX for l in labels):
            encoded.append((input_ids, labels))
    if not encoded:
        raise TrainerError(f"{corpus_path}: no masked positions to train on")

    torch.manual_seed(seed)
    shuffler = random.Random(seed)
    lr = learning_rate if learning_rate is not None else spec.pretrain_learning_rate
    optimizer = make_optimizer(spec.pretrain_optimizer, model.parameters(), lr, spec)
    steps_per_epoch = (len(encoded) + spec.batch_size - 1) // spec.batch_size
    scheduler = warmup_then_linear(
        optimizer, steps_per_epoch * spec.pretrain_epochs, spec.warmup_ratio
    )
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    model.train()
    loss_log: list[float] = []
    for _ in range(spec.pretrain_epochs):
        shuffler.shuffle(encoded)
        epoch_loss = 0.0
        batches = 0
        for lo in range(0, len(encoded), spec.batch_size):
            chunk = encoded[lo : lo + spec.batch_size]
            input_ids = pad_batch([ids for ids, _ in chunk], vocab.pad_id)
            labels = pad_batch([ls for _, ls in chunk], IGNORE_INDEX)
            logits = model.mlm_logits(input_ids, vocab.pad_id)
            loss = loss_fn(logits.view(-1, logits.shape[-1]), labels.view(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()
            epoch_loss += float(loss.detach())
            batches += 1
        loss_log.append(epoch_loss / batches)

    out_dir = Path(out_dir)
    save_model(model, out_dir)
    vocab.save(out_dir / "vocab.json")
    (out_dir / "loss_log.json").write_text(json.dumps(loss_log), encoding="utf-8")
    (out_dir / "train_config.json").write_text(
        json.dumps({"stage": "pretrain", "seed": seed, "learning_rate": lr,
                    "examples": len(encoded), "spec": spec.__dict__},
                   default=list),
        encoding="utf-8",
    )
    return out_dir
