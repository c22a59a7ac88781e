"""A deliberately tiny transformer encoder for CPU-scale smoke training.

Registry keyed by TrainSpec.base_checkpoint; full-scale encoder
checkpoints use the same file contracts but are outside this bridge's
scope.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from .errors import TrainerError

MODEL_CONFIGS = {
    "tiny": {"d_model": 48, "n_heads": 4, "n_layers": 2, "d_ff": 96, "max_len": 160},
    "small": {"d_model": 96, "n_heads": 4, "n_layers": 3, "d_ff": 192, "max_len": 256},
}


class TinyEncoder(nn.Module):
    def __init__(self, vocab_size: int, d_model: int, n_heads: int, n_layers: int,
                 d_ff: int, max_len: int, n_classes: int = 2):
        super().__init__()
        self.config = {
            "vocab_size": vocab_size, "d_model": d_model, "n_heads": n_heads,
            "n_layers": n_layers, "d_ff": d_ff, "max_len": max_len,
            "n_classes": n_classes,
        }
        self.token_embedding = nn.Embedding(vocab_size, d_model)
        self.position_embedding = nn.Embedding(max_len, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=d_model, nhead=n_heads, dim_feedforward=d_ff,
            batch_first=True, dropout=0.1,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=n_layers)
        self.norm = nn.LayerNorm(d_model)
        self.mlm_head = nn.Linear(d_model, vocab_size)
        self.cls_head = nn.Linear(d_model, n_classes)

    def encode(self, input_ids: torch.Tensor, pad_id: int) -> torch.Tensor:
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        hidden = self.token_embedding(input_ids) + self.position_embedding(positions)
        padding_mask = input_ids.eq(pad_id)
        hidden = self.encoder(hidden, src_key_padding_mask=padding_mask)
        return self.norm(hidden)

    def mlm_logits(self, input_ids: torch.Tensor, pad_id: int) -> torch.Tensor:
        return self.mlm_head(self.encode(input_ids, pad_id))

    def cls_logits(self, input_ids: torch.Tensor, pad_id: int) -> torch.Tensor:
        # Classification reads the first (<cls>) position.
        return self.cls_head(self.encode(input_ids, pad_id)[:, 0, :])

    def resize_vocab(self, new_size: int, generator: torch.Generator) -> None:
        """Grow token embedding and MLM head for new vocabulary entries."""
        old_size = self.config["vocab_size"]
        if new_size < old_size:
            raise TrainerError("vocabulary cannot shrink")
        if new_size == old_size:
            return
        d_model = self.config["d_model"]
        new_embedding = nn.Embedding(new_size, d_model)
        new_head = nn.Linear(d_model, new_size)
        # New rows follow the distribution of the trained embedding matrix so
        # unseen words start at a comparable magnitude.
        row_std = float(self.token_embedding.weight.detach().std())
        with torch.no_grad():
            nn.init.normal_(new_embedding.weight, std=row_std, generator=generator)
            nn.init.normal_(new_head.weight, std=0.02, generator=generator)
            nn.init.zeros_(new_head.bias)
            new_embedding.weight[:old_size] = self.token_embedding.weight
            new_head.weight[:old_size] = self.mlm_head.weight
            new_head.bias[:old_size] = self.mlm_head.bias
        self.token_embedding = new_embedding
        self.mlm_head = new_head
        self.config["vocab_size"] = new_size


def build_model(base_checkpoint: str, vocab_size: int) -> TinyEncoder:
    if base_checkpoint not in MODEL_CONFIGS:
        raise TrainerError(
            f"unknown base checkpoint {base_checkpoint!r}; "
            f"expected one of {sorted(MODEL_CONFIGS)}"
        )
    return TinyEncoder(vocab_size=vocab_size, **MODEL_CONFIGS[base_checkpoint])


def save_model(model: TinyEncoder, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / "model.pt")
    (directory / "model_config.json").write_text(
        json.dumps(model.config), encoding="utf-8"
    )


def load_model(directory) -> TinyEncoder:
    directory = Path(directory)
    config_path = directory / "model_config.json"
    if not config_path.exists():
        raise TrainerError(f"no model_config.json under {directory}")
    config = json.loads(config_path.read_text(encoding="utf-8"))
    model = TinyEncoder(**config)
    state = torch.load(directory / "model.pt", map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    return model
