"""Brand / product-type entity tagging for search queries.

A char-BiLSTM + word-BiGRU-CRF sequence tagger trained iteratively over
three dataset roles (golden, noisy, synthetic), with a greedy catalog
matcher as baseline and weak labeler, a CLI, and an HTTP tagging service.
"""

from .core import (
    Catalog,
    Dataset,
    EntitySpan,
    EntityType,
    GoldenSplit,
    LabelTag,
    Source,
    TaggedQuery,
    bio_decode,
    bio_encode,
    pattern_of,
    split_golden,
)
from .preprocess import NormalizationConfig, normalize_query
from .datagen import (
    AmbiguousLexicon,
    MiniWorldConfig,
    balance_ambiguous,
    distant_label,
    generate_miniworld,
    generate_synthetic,
    stratified_sample,
)
from .net import ModelDims, ModelParams, Vocab, init_params
from .train import EvalReport, TrainConfig, evaluate_f1, predict, train_model
from .triplelearn import (
    IterationReport,
    TripleLearnConfig,
    consensus_filter,
    coverage,
    one_pass_baseline,
    run_triplelearn,
)
from .model_io import load_embeddings, load_model, nearest_neighbors, save_model

__version__ = "0.1.0"

__all__ = [
    "AmbiguousLexicon",
    "Catalog",
    "Dataset",
    "EntitySpan",
    "EntityType",
    "EvalReport",
    "GoldenSplit",
    "IterationReport",
    "LabelTag",
    "MiniWorldConfig",
    "ModelDims",
    "ModelParams",
    "NormalizationConfig",
    "Source",
    "TaggedQuery",
    "TrainConfig",
    "TripleLearnConfig",
    "Vocab",
    "balance_ambiguous",
    "bio_decode",
    "bio_encode",
    "consensus_filter",
    "coverage",
    "distant_label",
    "evaluate_f1",
    "generate_miniworld",
    "generate_synthetic",
    "init_params",
    "load_embeddings",
    "load_model",
    "nearest_neighbors",
    "normalize_query",
    "one_pass_baseline",
    "pattern_of",
    "predict",
    "run_triplelearn",
    "save_model",
    "split_golden",
    "stratified_sample",
    "train_model",
]
