"""Training bridge: MLM pretraining and factuality fine-tuning over emitted corpora."""

__version__ = "0.1.0"

from .data import format_input
from .errors import TrainerError
from .finetune import finetune_classifier
from .predict import predict
from .pretrain import pretrain_mlm
from .spec import TrainSpec

__all__ = [
    "TrainSpec",
    "TrainerError",
    "finetune_classifier",
    "format_input",
    "predict",
    "pretrain_mlm",
]
