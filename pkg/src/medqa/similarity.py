"""Siamese sentence-pair scoring.

Both sentences run through the SAME encoder parameters; the score is the
Manhattan-exponential similarity exp(-L1(pooled_a - pooled_b)), which maps
L1 distance onto (0, 1] with 1 meaning identical pooled vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingTable, embed_sequence, tokenize
from .encoder import EncoderParams, SentenceEncoding, encode


class EmptyQuestionError(ValueError):
    """A question tokenized to nothing; `side` says which one."""

    def __init__(self, side: str):
        super().__init__(f"{side} question has no tokens")
        self.side = side


@dataclass
class PairScore:
    similarity: float
    left_encoding: SentenceEncoding
    right_encoding: SentenceEncoding


def manhattan_similarity(a, b) -> float:
    """exp(-L1 distance); 1.0 for identical vectors, asymptoting to 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"pooled vectors differ in shape: {a.shape} vs {b.shape}")
    return float(np.exp(-np.abs(a - b).sum()))


def encode_question(
    params: EncoderParams, table: EmbeddingTable, text: str, max_len: int,
    side: str = "question",
) -> SentenceEncoding:
    """Tokenize, embed, and encode one question; rejects empty tokenizations."""
    seq = tokenize(text)
    if not seq.tokens:
        raise EmptyQuestionError(side)
    vectors, mask = embed_sequence(table, seq, max_len)
    return encode(params, vectors, mask)


def score_pair(
    params: EncoderParams, table: EmbeddingTable, q1: str, q2: str, max_len: int
) -> PairScore:
    """Similarity of two questions under shared encoder weights.

    Symmetric in (q1, q2); raises EmptyQuestionError naming the offending
    side when either question tokenizes to nothing.
    """
    left = encode_question(params, table, q1, max_len, side="left")
    right = encode_question(params, table, q2, max_len, side="right")
    return PairScore(
        similarity=manhattan_similarity(left.pooled, right.pooled),
        left_encoding=left,
        right_encoding=right,
    )


def rank_against_corpus(
    params: EncoderParams,
    table: EmbeddingTable,
    query: str,
    candidates: list[str],
    k: int,
    max_len: int,
) -> list[tuple[int, float]]:
    """Top-k candidate indices by similarity to the query, descending.

    The query is encoded once and compared against each candidate. Ties
    break toward the lower index, and k larger than the candidate count
    returns everything. Candidates that tokenize to nothing are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not candidates:
        raise ValueError("candidates must be non-empty")
    query_enc = encode_question(params, table, query, max_len, side="query")
    scored: list[tuple[int, float]] = []
    for i, cand in enumerate(candidates):
        try:
            enc = encode_question(params, table, cand, max_len, side="candidate")
        except EmptyQuestionError:
            continue
        scored.append((i, manhattan_similarity(query_enc.pooled, enc.pooled)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
