"""File-format adapters for the corpus and pairs contracts.

The record schemas here mirror the emitting toolkit's documented file
formats; the files are the only interface between the two packages, so
the field checks are strict. test_contract pins the shared byte shapes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import TrainerError
from .vocab import Vocab

CORPUS_FIELDS = {
    "id", "strategy", "text", "masked_text", "targets", "source_entities", "seed",
}
MASK_LITERAL = "[MASK]"
SEP_LITERAL = "[SEP]"

LABEL_FACTUAL = "factual"
LABEL_NON_FACTUAL = "non_factual"
LABEL_TO_CLASS = {LABEL_NON_FACTUAL: 0, LABEL_FACTUAL: 1}

IGNORE_INDEX = -100


@dataclass(frozen=True)
class CorpusExample:
    doc_id: str
    masked_words: list[str]  # masked_text tokens, [MASK] unexpanded
    target_surfaces: list[str]  # one per [MASK] occurrence, in order


@dataclass(frozen=True)
class PairExample:
    pair_id: str
    text: str  # summary [SEP] document
    label: int  # class index


def format_input(summary: str, document: str) -> str:
    """The classifier input contract: summary, a literal [SEP], document."""
    return f"{summary} {SEP_LITERAL} {document}"


def read_corpus(path) -> list[CorpusExample]:
    examples: list[CorpusExample] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TrainerError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict) or set(record) != CORPUS_FIELDS:
                raise TrainerError(f"{path}:{lineno}: unexpected corpus record fields")
            masked_words = record["masked_text"].split()
            targets = [t["surface"] for t in record["targets"]]
            if masked_words.count(MASK_LITERAL) != len(targets):
                raise TrainerError(
                    f"{path}:{lineno}: mask token count does not match targets"
                )
            examples.append(
                CorpusExample(
                    doc_id=record["id"],
                    masked_words=masked_words,
                    target_surfaces=targets,
                )
            )
    if not examples:
        raise TrainerError(f"{path}: empty corpus")
    return examples


def read_pairs(path) -> list[PairExample]:
    pairs: list[PairExample] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TrainerError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            for key in ("id", "summary", "document", "label"):
                if key not in record or not isinstance(record[key], str):
                    raise TrainerError(f"{path}:{lineno}: missing field {key!r}")
            if record["label"] not in LABEL_TO_CLASS:
                raise TrainerError(
                    f"{path}:{lineno}: label must be factual/non_factual"
                )
            if record["id"] in seen:
                raise TrainerError(f"{path}:{lineno}: duplicate pair id {record['id']!r}")
            seen.add(record["id"])
            pairs.append(
                PairExample(
                    pair_id=record["id"],
                    text=format_input(record["summary"], record["document"]),
                    label=LABEL_TO_CLASS[record["label"]],
                )
            )
    if not pairs:
        raise TrainerError(f"{path}: no pairs")
    return pairs


def corpus_texts(path) -> list[str]:
    """Unmasked texts of a corpus file (for vocabulary construction)."""
    texts = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                texts.append(json.loads(line)["text"])
    return texts


def mlm_example(example: CorpusExample, vocab: Vocab, max_len: int):
    """(input ids, labels): each [MASK] word expands to one <mask> token per
    word of its target surface, labelled with that word's id."""
    input_ids: list[int] = []
    labels: list[int] = []
    queue = list(example.target_surfaces)
    for word in example.masked_words:
        if word == MASK_LITERAL:
            surface_ids = vocab.encode(queue.pop(0))
            input_ids.extend([vocab.mask_id] * len(surface_ids))
            labels.extend(surface_ids)
        else:
            input_ids.append(vocab.stoi.get(word, vocab.unk_id))
            labels.append(IGNORE_INDEX)
    return input_ids[:max_len], labels[:max_len]


def pair_example(example: PairExample, vocab: Vocab, max_len: int):
    """<cls>-prefixed token ids for a classification input."""
    ids = [vocab.cls_id] + vocab.encode(example.text)
    return ids[:max_len]


def pad_batch(sequences: list[list[int]], pad_value: int) -> torch.Tensor:
    width = max(len(s) for s in sequences)
    out = torch.full((len(sequences), width), pad_value, dtype=torch.long)
    for i, seq in enumerate(sequences):
        out[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
    return out
