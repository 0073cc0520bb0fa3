"""Self-contained fixtures: a synthetic trainable corpus and shipped data files.

The toy corpus exists so the whole train/evaluate cycle can run in seconds
with no external downloads: 100 duplicate pairs built by rephrasing the
same (condition, question kind) with synonym templates, plus 100 random
cross-pairs labeled distinct.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .corpus import load_qa_records
from .embeddings import EmbeddingTable, load_vectors, random_table, tokenize
from .encoder import EncoderParams, init_params
from .entities import MedicalDictionary, load_dictionary
from .graph import KnowledgeGraph, import_graph
from .router import QaRecord, Router, RouterConfig
from .training import LabeledPair

TOY_CONDITIONS = [
    "flu", "cold", "asthma", "migraine", "diabetes",
    "anemia", "arthritis", "eczema", "insomnia", "gastritis",
    "bronchitis", "measles", "mumps", "gout", "vertigo",
    "shingles", "tonsillitis", "sinusitis", "colitis", "dermatitis",
]

# Each family is two synonymous phrasings of one question kind.
TOY_TEMPLATES = [
    ("how do you treat {}", "how can you cure {}"),
    ("what are the symptoms of {}", "what are the signs of {}"),
    ("what causes {}", "why do people get {}"),
    ("how do i prevent {}", "how to avoid {}"),
    ("what is {}", "tell me about {}"),
]

TOY_EMBEDDING_DIM = 24


def toy_vocabulary() -> list[str]:
    words: set[str] = set(TOY_CONDITIONS)
    for a, b in TOY_TEMPLATES:
        words.update(tokenize(a.format("x")).tokens)
        words.update(tokenize(b.format("x")).tokens)
    words.discard("x")
    return sorted(words)


def toy_corpus(seed: int = 0) -> tuple[list[LabeledPair], EmbeddingTable]:
    """200 labeled pairs and a seeded random embedding table for them.

    Duplicates pair the two phrasings of one (condition, kind); negatives
    pair questions from two different (condition, kind) slots.
    """
    rng = np.random.default_rng(seed)
    combos = [(c, t) for c in TOY_CONDITIONS for t in range(len(TOY_TEMPLATES))]
    pairs: list[LabeledPair] = []
    for condition, t in combos:
        first, second = TOY_TEMPLATES[t]
        pairs.append(
            LabeledPair(q1=first.format(condition), q2=second.format(condition), label=1)
        )
    n_combos = len(combos)
    for _ in range(n_combos):
        i = int(rng.integers(n_combos))
        j = int(rng.integers(n_combos))
        while j == i:
            j = int(rng.integers(n_combos))
        c1, t1 = combos[i]
        c2, t2 = combos[j]
        q1 = TOY_TEMPLATES[t1][int(rng.integers(2))].format(c1)
        q2 = TOY_TEMPLATES[t2][int(rng.integers(2))].format(c2)
        pairs.append(LabeledPair(q1=q1, q2=q2, label=0))
    table = random_table(
        toy_vocabulary() + TOY_CONDITIONS, dim=TOY_EMBEDDING_DIM, seed=seed + 1
    )
    return pairs, table


def data_path(name: str):
    """Path to a data file shipped inside the package."""
    return resources.files("medqa").joinpath("data", name)


def fixture_graph() -> KnowledgeGraph:
    """The shipped demo graph: three diseases, their symptoms, one overlap."""
    text = data_path("fixture_graph.jsonl").read_text(encoding="utf-8")
    return import_graph(text.splitlines())


def fixture_dictionary() -> MedicalDictionary:
    with resources.as_file(data_path("fixture_dictionary.txt")) as path:
        return load_dictionary(path)


def fixture_qa_records() -> list[QaRecord]:
    text = data_path("fixture_qa.jsonl").read_text(encoding="utf-8")
    result = load_qa_records(text.splitlines())
    if result.errors:
        raise RuntimeError(f"shipped corpus is broken: {result.errors}")
    return result.records


def fixture_embedding_table() -> EmbeddingTable:
    with resources.as_file(data_path("fixture_vectors.txt")) as path:
        return load_vectors(path)


FIXTURE_ENCODER_SEED = 5


def fixture_router(
    params: EncoderParams | None = None, config: RouterConfig | None = None
) -> Router:
    """A ready-to-ask Router over the shipped graph, corpus and vectors.

    Pass trained params for meaningful corpus ranking; the default seeded
    initialization still exercises every code path deterministically.
    """
    table = fixture_embedding_table()
    if params is None:
        params = init_params(hidden=8, embedding_dim=table.dim, seed=FIXTURE_ENCODER_SEED)
    return Router(fixture_graph(), params, table, fixture_qa_records(), config)
