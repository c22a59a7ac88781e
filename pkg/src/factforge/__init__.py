"""Knowledge-base-driven factuality pretraining corpora and evaluation."""

__version__ = "0.1.0"

from .datasets import (
    DatasetSplit,
    LabeledPair,
    drop_nei,
    exclude_subset,
    format_pair_input,
    load_pairs,
    read_pairs,
    verify_split,
    write_pairs,
)
from .errors import (
    ConfigError,
    DatasetError,
    FactforgeError,
    IntegrityError,
    KbLookupError,
    ParseError,
    SynthesisError,
    UndefinedMetricError,
)
from .kb import (
    DescriptionStore,
    KbStats,
    KnowledgeBase,
    kb_stats,
    load_descriptions,
    load_kb,
    out_neighborhood,
)
from .masking import (
    CorpusRecord,
    MaskedDocument,
    mask_document,
    mask_stream,
    read_corpus,
    unmask,
    write_corpus,
)
from .metrics import (
    ConfusionMatrix,
    CorrelationResult,
    PredictionRecord,
    balanced_accuracy,
    category_ablation,
    correlate,
    evaluate_classification,
    micro_f1,
    pearson,
    read_predictions,
    spearman,
)
from .synth import (
    Document,
    SynthConfig,
    Unit,
    Walk,
    sample_walk,
    synth_entity_wiki,
    synth_evidence,
    synth_knowledge_walk,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConfusionMatrix",
    "CorpusRecord",
    "CorrelationResult",
    "DatasetError",
    "DatasetSplit",
    "DescriptionStore",
    "Document",
    "FactforgeError",
    "IntegrityError",
    "KbLookupError",
    "KbStats",
    "KnowledgeBase",
    "LabeledPair",
    "MaskedDocument",
    "ParseError",
    "PredictionRecord",
    "SynthConfig",
    "SynthesisError",
    "UndefinedMetricError",
    "Unit",
    "Walk",
    "balanced_accuracy",
    "category_ablation",
    "correlate",
    "drop_nei",
    "evaluate_classification",
    "exclude_subset",
    "format_pair_input",
    "kb_stats",
    "load_descriptions",
    "load_kb",
    "load_pairs",
    "mask_document",
    "mask_stream",
    "micro_f1",
    "out_neighborhood",
    "pearson",
    "read_corpus",
    "read_pairs",
    "read_predictions",
    "sample_walk",
    "spearman",
    "synth_entity_wiki",
    "synth_evidence",
    "synth_knowledge_walk",
    "unmask",
    "verify_split",
    "write_corpus",
    "write_pairs",
]
