"""Emit a predictions file the evaluation toolkit scores as-is."""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .data import LABEL_FACTUAL, LABEL_NON_FACTUAL, pad_batch, pair_example, read_pairs
from .model import load_model
from .vocab import Vocab


def predict(model_dir, pairs_path, out_path, *, batch_size: int = 32) -> int:
    """Score every pair; writes {id, pred_label, score_factual} lines.

    pred_label is factual iff score_factual >= 0.5 (ties toward factual).
    Returns the number of records written.
    """
    model = load_model(model_dir)
    vocab = Vocab.load(Path(model_dir) / "vocab.json")
    max_len = model.config["max_len"]
    pairs = read_pairs(pairs_path)

    model.eval()
    count = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as sink:
        with torch.no_grad():
            for lo in range(0, len(pairs), batch_size):
                chunk = pairs[lo : lo + batch_size]
                input_ids = pad_batch(
                    [pair_example(p, vocab, max_len) for p in chunk], vocab.pad_id
                )
                probs = torch.softmax(model.cls_logits(input_ids, vocab.pad_id), dim=-1)
                for pair, row in zip(chunk, probs):
                    score = float(row[1])
                    record = {
                        "id": pair.pair_id,
                        "pred_label": LABEL_FACTUAL if score >= 0.5 else LABEL_NON_FACTUAL,
                        "score_factual": score,
                    }
                    sink.write(json.dumps(record, ensure_ascii=False) + "\n")
                    count += 1
    return count
