"""Hybrid medical question answering.

A typed knowledge graph answers recognized entity/intent questions directly;
everything else falls back to ranking a QA corpus with a Siamese BiLSTM
word-attention similarity model.
"""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, embed_sequence, load_vectors, tokenize
from .encoder import EncoderParams, encode, init_params, load_params, save_params
from .entities import (
    EntityMatch,
    Intent,
    MedicalDictionary,
    build_automaton,
    classify_intent,
    extract_entities,
    load_dictionary,
)
from .graph import Entity, KnowledgeGraph, export_graph, import_graph
from .numeric import GradientReport, ShapeError, check_gradients, finite_diff_gradient
from .router import ChatAnswer, QaRecord, Router, RouterConfig, route
from .similarity import manhattan_similarity, rank_against_corpus, score_pair
from .training import LabeledPair, TrainConfig, evaluate, split, train

__all__ = [
    "__version__",
    "ChatAnswer",
    "EmbeddingTable",
    "EncoderParams",
    "Entity",
    "EntityMatch",
    "GradientReport",
    "Intent",
    "KnowledgeGraph",
    "LabeledPair",
    "MedicalDictionary",
    "QaRecord",
    "Router",
    "RouterConfig",
    "ShapeError",
    "TrainConfig",
    "build_automaton",
    "check_gradients",
    "classify_intent",
    "embed_sequence",
    "encode",
    "evaluate",
    "export_graph",
    "extract_entities",
    "finite_diff_gradient",
    "import_graph",
    "init_params",
    "load_dictionary",
    "load_params",
    "load_vectors",
    "manhattan_similarity",
    "rank_against_corpus",
    "route",
    "save_params",
    "score_pair",
    "split",
    "tokenize",
    "train",
]
