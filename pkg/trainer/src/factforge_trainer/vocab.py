"""Word-level vocabulary with the special tokens the tiny models need."""

from __future__ import annotations

import json
from pathlib import Path

PAD, UNK, CLS, MASK = "<pad>", "<unk>", "<cls>", "<mask>"
SPECIALS = (PAD, UNK, CLS, MASK)


class Vocab:
    def __init__(self, words: list[str] | None = None):
        self.itos: list[str] = list(SPECIALS)
        self.stoi: dict[str, int] = {w: i for i, w in enumerate(self.itos)}
        for word in words or ():
            self.add(word)

    def add(self, word: str) -> int:
        index = self.stoi.get(word)
        if index is None:
            index = len(self.itos)
            self.itos.append(word)
            self.stoi[word] = index
        return index

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad_id(self) -> int:
        return self.stoi[PAD]

    @property
    def unk_id(self) -> int:
        return self.stoi[UNK]

    @property
    def cls_id(self) -> int:
        return self.stoi[CLS]

    @property
    def mask_id(self) -> int:
        return self.stoi[MASK]

    def encode(self, text: str) -> list[int]:
        unk = self.unk_id
        return [self.stoi.get(word, unk) for word in text.split()]

    def extend_from_texts(self, texts) -> int:
        """Add every unseen word; returns the number of new entries."""
        before = len(self.itos)
        for text in texts:
            for word in text.split():
                self.add(word)
        return len(self.itos) - before

    @classmethod
    def from_texts(cls, texts) -> "Vocab":
        vocab = cls()
        vocab.extend_from_texts(texts)
        return vocab

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.itos, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "Vocab":
        itos = json.loads(Path(path).read_text(encoding="utf-8"))
        vocab = cls()
        vocab.itos = list(itos)
        vocab.stoi = {w: i for i, w in enumerate(vocab.itos)}
        return vocab
