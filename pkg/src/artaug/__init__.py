"""artaug: augmentation planning, mixed sampling and caption/retrieval evaluation."""

from .augment import (
    ExecutionReport,
    GenerationRequest,
    SyntheticDataset,
    VariationRecord,
    derive_seed,
    execute_plan,
    load_synthetic_manifest,
    plan_variations,
    save_synthetic_manifest,
    variation_key,
)
from .backends import MockBackend, RemoteBackend, mock_generate, remote_generate
from .capmetrics import (
    CaptionPair,
    MetricReport,
    bertscore,
    bleu,
    cider,
    evaluate_captions,
    meteor_lite,
    rouge_l,
    tokenize,
)
from .corpus import (
    ArtworkRecord,
    Dataset,
    Prompt,
    build_prompt,
    load_manifest,
    save_manifest,
    select_split,
)
from .embedstore import (
    EmbeddingTable,
    SimilarityReport,
    cosine,
    load_embeddings,
    save_embeddings,
    similarity_report,
)
from .retrieval import RecallReport, pooled_recall, recall_at_k, similarity_matrix
from .sampler import (
    MixedBatch,
    MixedItem,
    MixedSampler,
    SamplerConfig,
    mixed_epoch,
    variation_histogram,
)

__version__ = "0.1.0"

__all__ = [
    "ArtworkRecord",
    "CaptionPair",
    "Dataset",
    "EmbeddingTable",
    "ExecutionReport",
    "GenerationRequest",
    "MetricReport",
    "MixedBatch",
    "MixedItem",
    "MixedSampler",
    "MockBackend",
    "Prompt",
    "RecallReport",
    "RemoteBackend",
    "SamplerConfig",
    "SimilarityReport",
    "SyntheticDataset",
    "VariationRecord",
    "bertscore",
    "bleu",
    "build_prompt",
    "cider",
    "cosine",
    "derive_seed",
    "evaluate_captions",
    "execute_plan",
    "load_embeddings",
    "load_manifest",
    "load_synthetic_manifest",
    "meteor_lite",
    "mixed_epoch",
    "mock_generate",
    "plan_variations",
    "pooled_recall",
    "recall_at_k",
    "remote_generate",
    "rouge_l",
    "save_embeddings",
    "save_manifest",
    "save_synthetic_manifest",
    "select_split",
    "similarity_matrix",
    "similarity_report",
    "tokenize",
    "variation_histogram",
    "variation_key",
]
