"""Cross-lingual transferability metrics over checkpoint pools.

The package measures how well knowledge planted in one language carries
to another: it decomposes a checkpoint's target-language error into
training error, an inter-language component, and an intra-language
component; reduces a checkpoint pool to a windowed-minimum transfer
score; ranks transfer directions and scores rankings pairwise; and ships
a planted-truth simulator so every metric is testable without training a
model.
"""

from . import errors
from .corpus import (
    LabeledParallelCorpus,
    ParallelCorpus,
    TranslationPair,
    corrupt_jointly,
    corrupt_labels,
    corruption_count,
    gen_random_labels,
    pair_translations,
    read_parallel_texts,
    read_parallel_tsv,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateRanking,
    DimensionMismatch,
    DirectionError,
    EmptyQualifyingWindow,
    EmptySet,
    EngineError,
    LabelMismatch,
    LanguageSetMismatch,
    MissingFile,
    NonFiniteScore,
    RatioOutOfRange,
    SchemaError,
    ZeroVector,
)
from .loader import load_embedding_pairs, load_pool, validate_pool, write_pool
from .metrics import (
    DecompositionReport,
    ErrorCounts,
    IGapCurve,
    IGapResult,
    accuracy,
    decompose,
    error_rate,
    igap,
    igap_curve,
    igap_from_decompositions,
    make_grid,
    mean_decomposition,
    mismatch_counts,
    pool_decompositions,
    transfer_gap,
)
from .ranking import (
    HIGHER_IS_BETTER,
    LOWER_IS_BETTER,
    METRIC_COS,
    METRIC_DOT,
    METRIC_L2,
    Ranking,
    ScoreTable,
    gold_accuracies,
    gold_ranking,
    predict_ranking_from_similarity,
    rank_by_scores,
    similarity_score,
    tdr_accuracy,
)
from .simulator import ExpectedDecomposition, SimConfig, expected_metrics, simulate_pool
from .types import (
    ROLE_GENERIC,
    ROLE_SOURCE_TRAIN,
    ROLE_SOURCE_VAL,
    ROLE_TARGET_VAL,
    ROLE_TRANSLATED_TRAIN,
    ROLES,
    SEVERITY_ERROR,
    SEVERITY_WARNING,
    CheckpointEval,
    CheckpointPool,
    DirectionSets,
    EmbeddingPairSet,
    EvalSet,
    ExampleLabel,
    PredictionRecord,
    ValidationIssue,
    ValidationReport,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "__version__",
    "ROLES",
    "ROLE_GENERIC",
    "ROLE_SOURCE_TRAIN",
    "ROLE_SOURCE_VAL",
    "ROLE_TARGET_VAL",
    "ROLE_TRANSLATED_TRAIN",
    "SEVERITY_ERROR",
    "SEVERITY_WARNING",
    "CheckpointEval",
    "CheckpointPool",
    "DirectionSets",
    "EmbeddingPairSet",
    "EvalSet",
    "ExampleLabel",
    "PredictionRecord",
    "ValidationIssue",
    "ValidationReport",
    "EngineError",
    "MissingFile",
    "SchemaError",
    "AlignmentError",
    "LabelMismatch",
    "EmptySet",
    "ConfigError",
    "DirectionError",
    "LanguageSetMismatch",
    "DegenerateRanking",
    "NonFiniteScore",
    "DimensionMismatch",
    "ZeroVector",
    "RatioOutOfRange",
    "EmptyQualifyingWindow",
    "load_pool",
    "validate_pool",
    "write_pool",
    "load_embedding_pairs",
    "error_rate",
    "accuracy",
    "mismatch_counts",
    "decompose",
    "transfer_gap",
    "igap",
    "igap_curve",
    "igap_from_decompositions",
    "make_grid",
    "mean_decomposition",
    "pool_decompositions",
    "DecompositionReport",
    "ErrorCounts",
    "IGapResult",
    "IGapCurve",
    "tdr_accuracy",
    "rank_by_scores",
    "gold_ranking",
    "gold_accuracies",
    "similarity_score",
    "predict_ranking_from_similarity",
    "Ranking",
    "ScoreTable",
    "LOWER_IS_BETTER",
    "HIGHER_IS_BETTER",
    "METRIC_L2",
    "METRIC_DOT",
    "METRIC_COS",
    "ParallelCorpus",
    "LabeledParallelCorpus",
    "TranslationPair",
    "read_parallel_tsv",
    "read_parallel_texts",
    "gen_random_labels",
    "corrupt_labels",
    "corrupt_jointly",
    "corruption_count",
    "pair_translations",
    "SimConfig",
    "simulate_pool",
    "expected_metrics",
    "ExpectedDecomposition",
]
