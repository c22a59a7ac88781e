"""Sequence-classification fine-tuning with early stopping on dev BACC."""

from __future__ import annotations

import copy
import json
import random
from pathlib import Path

import torch
from torch import nn

from .data import PairExample, pad_batch, pair_example, read_pairs
from .errors import TrainerError
from .model import load_model, save_model
from .pretrain import make_optimizer
from .spec import TrainSpec
from .vocab import Vocab


def balanced_accuracy(gold: list[int], pred: list[int]) -> float:
    classes = sorted(set(gold))
    if len(classes) != 2:
        raise TrainerError("balanced accuracy needs both classes in the gold labels")
    recalls = []
    for cls in classes:
        members = [i for i, g in enumerate(gold) if g == cls]
        hits = sum(1 for i in members if pred[i] == cls)
        recalls.append(hits / len(members))
    return sum(recalls) / 2.0


def _predict_classes(model, vocab, pairs: list[PairExample], max_len: int, batch_size: int):
    model.eval()
    predictions: list[int] = []
    with torch.no_grad():
        for lo in range(0, len(pairs), batch_size):
            chunk = pairs[lo : lo + batch_size]
            input_ids = pad_batch(
                [pair_example(p, vocab, max_len) for p in chunk], vocab.pad_id
            )
            logits = model.cls_logits(input_ids, vocab.pad_id)
            predictions.extend(logits.argmax(dim=-1).tolist())
    return predictions


def finetune_classifier(
    checkpoint_dir,
    train_path,
    dev_path,
    spec: TrainSpec,
    out_dir,
    *,
    seed: int = 0,
    learning_rate: float | None = None,
) -> Path:
    """Fine-tune a pretrained checkpoint on canonical labeled pairs.

    Stops early once dev balanced accuracy has not improved for
    ``spec.early_stopping_patience`` epochs and keeps the best weights.
    The dev set is a separate canonical pairs file. ``learning_rate``
    overrides the spec value for smoke runs on tiny models.
    """
    if dev_path is None:
        raise TrainerError("missing dev split: pass a dev pairs file")
    train_pairs = read_pairs(train_path)
    dev_pairs = read_pairs(dev_path)
    if len({p.label for p in train_pairs}) < 2:
        raise TrainerError("training labels are constant; nothing to learn")
    if len({p.label for p in dev_pairs}) < 2:
        raise TrainerError("dev labels are constant; early stopping is undefined")

    model = load_model(checkpoint_dir)
    vocab = Vocab.load(Path(checkpoint_dir) / "vocab.json")
    torch.manual_seed(seed)
    generator = torch.Generator().manual_seed(seed)
    added = vocab.extend_from_texts(p.text for p in train_pairs + dev_pairs)
    if added:
        model.resize_vocab(len(vocab), generator)
    max_len = min(spec.max_sequence_length, model.config["max_len"])

    lr = learning_rate if learning_rate is not None else spec.finetune_learning_rate
    optimizer = make_optimizer(spec.finetune_optimizer, model.parameters(), lr, spec)
    loss_fn = nn.CrossEntropyLoss()
    shuffler = random.Random(seed)

    best_bacc = -1.0
    best_state = None
    best_epoch = -1
    epochs_without_improvement = 0
    history: list[float] = []
    order = list(range(len(train_pairs)))

    for epoch in range(spec.finetune_max_epochs):
        model.train()
        shuffler.shuffle(order)
        for lo in range(0, len(order), spec.batch_size):
            chunk = [train_pairs[i] for i in order[lo : lo + spec.batch_size]]
            input_ids = pad_batch(
                [pair_example(p, vocab, max_len) for p in chunk], vocab.pad_id
            )
            labels = torch.tensor([p.label for p in chunk], dtype=torch.long)
            loss = loss_fn(model.cls_logits(input_ids, vocab.pad_id), labels)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

        dev_pred = _predict_classes(model, vocab, dev_pairs, max_len, spec.batch_size)
        bacc = balanced_accuracy([p.label for p in dev_pairs], dev_pred)
        history.append(bacc)
        if bacc > best_bacc:
            best_bacc = bacc
            best_state = copy.deepcopy(model.state_dict())
            best_epoch = epoch
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= spec.early_stopping_patience:
                break

    model.load_state_dict(best_state)
    out_dir = Path(out_dir)
    save_model(model, out_dir)
    vocab.save(out_dir / "vocab.json")
    (out_dir / "finetune_log.json").write_text(
        json.dumps(
            {
                "dev_bacc_history": history,
                "best_dev_bacc": best_bacc,
                "best_epoch": best_epoch,
                "seed": seed,
                "learning_rate": lr,
            }
        ),
        encoding="utf-8",
    )
    return out_dir
