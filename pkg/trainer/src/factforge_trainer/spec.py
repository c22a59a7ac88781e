"""Training hyperparameters. Defaults follow the reference configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import TrainerError


@dataclass(frozen=True)
class TrainSpec:
    base_checkpoint: str = "tiny"
    pretrain_learning_rate: float = 2e-5
    finetune_learning_rate: float = 1e-4
    weight_decay: float = 1e-5
    batch_size: int = 32
    pretrain_epochs: int = 5
    finetune_max_epochs: int = 50
    # Dev-BACC patience; at desk scale the RAdam liftoff on tiny models can
    # take several flat epochs, so this stays comfortably above that.
    early_stopping_patience: int = 10
    adam_epsilon: float = 1e-6
    adam_betas: tuple[float, float] = (0.9, 0.98)
    warmup_ratio: float = 0.06
    pretrain_optimizer: str = "adam"
    finetune_optimizer: str = "radam"
    max_sequence_length: int = 128

    def __post_init__(self):
        positive = {
            "pretrain_learning_rate": self.pretrain_learning_rate,
            "finetune_learning_rate": self.finetune_learning_rate,
            "weight_decay": self.weight_decay,
            "batch_size": self.batch_size,
            "pretrain_epochs": self.pretrain_epochs,
            "finetune_max_epochs": self.finetune_max_epochs,
            "early_stopping_patience": self.early_stopping_patience,
            "adam_epsilon": self.adam_epsilon,
            "max_sequence_length": self.max_sequence_length,
        }
        for name, value in positive.items():
            if value <= 0:
                raise TrainerError(f"{name} must be positive, got {value}")
        if not 0.0 <= self.warmup_ratio < 1.0:
            raise TrainerError(f"warmup_ratio must be in [0, 1), got {self.warmup_ratio}")
        if not all(0.0 < b < 1.0 for b in self.adam_betas):
            raise TrainerError(f"adam_betas must be in (0, 1), got {self.adam_betas}")
