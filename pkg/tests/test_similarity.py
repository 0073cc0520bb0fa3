"""Pair scoring: Manhattan-exponential similarity and corpus ranking."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medqa.embeddings import EmbeddingTable, random_table
from medqa.encoder import init_params
from medqa.similarity import (
    EmptyQuestionError,
    manhattan_similarity,
    rank_against_corpus,
    score_pair,
)

WORDS = ["cat", "cold", "cure", "dog", "fever", "flu", "how", "treat", "what", "you"]


@pytest.fixture(scope="module")
def model():
    params = init_params(hidden=3, embedding_dim=4, seed=11)
    table = random_table(WORDS, dim=4, seed=12)
    return params, table


class TestManhattanSimilarity:
    def test_identical_vectors_score_one(self):
        v = np.array([1.5, -2.0, 0.25])
        assert manhattan_similarity(v, v) == pytest.approx(1.0, abs=1e-15)

    def test_log_two_distance_scores_half(self):
        a = np.array([0.0, 0.0])
        b = np.array([math.log(2.0), 0.0])
        assert manhattan_similarity(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            manhattan_similarity(np.zeros(2), np.zeros(3))

    @given(
        st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=8),
        st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=8),
    )
    @settings(max_examples=100, deadline=None)
    def test_range_and_symmetry(self, xs, ys):
        n = min(len(xs), len(ys))
        a, b = np.array(xs[:n]), np.array(ys[:n])
        s = manhattan_similarity(a, b)
        assert 0.0 < s <= 1.0
        assert s == pytest.approx(manhattan_similarity(b, a), abs=1e-15)


class TestScorePair:
    def test_identical_questions_score_one(self, model):
        params, table = model
        score = score_pair(params, table, "how you treat cat", "how you treat cat", max_len=6)
        assert score.similarity == pytest.approx(1.0, abs=1e-9)

    def test_definition_holds(self, model):
        params, table = model
        score = score_pair(params, table, "cat cold", "dog fever flu", max_len=5)
        expected = math.exp(
            -float(np.abs(score.left_encoding.pooled - score.right_encoding.pooled).sum())
        )
        assert score.similarity == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self, model):
        params, table = model
        a = score_pair(params, table, "cat cold cure", "what you treat", max_len=5)
        b = score_pair(params, table, "what you treat", "cat cold cure", max_len=5)
        assert a.similarity == pytest.approx(b.similarity, abs=1e-9)

    def test_empty_left_rejected_with_side(self, model):
        params, table = model
        with pytest.raises(EmptyQuestionError) as exc:
            score_pair(params, table, "?!", "cat", max_len=5)
        assert exc.value.side == "left"

    def test_empty_right_rejected_with_side(self, model):
        params, table = model
        with pytest.raises(EmptyQuestionError) as exc:
            score_pair(params, table, "cat", "", max_len=5)
        assert exc.value.side == "right"

    def test_encodings_carry_attention_weights(self, model):
        params, table = model
        score = score_pair(params, table, "cat cold", "dog", max_len=4)
        assert score.left_encoding.attention_weights.shape == (4,)
        assert score.left_encoding.attention_weights.sum() == pytest.approx(1.0, abs=1e-6)

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=30, deadline=None)
    def test_similarity_in_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        params = init_params(hidden=2, embedding_dim=3, seed=seed % 100)
        table = EmbeddingTable(dim=3)
        words = [f"w{rng.integers(100)}" for _ in range(int(rng.integers(1, 6)))]
        q1 = " ".join(words)
        q2 = " ".join(reversed(words)) or "x"
        s = score_pair(params, table, q1, q2, max_len=5).similarity
        assert 0.0 < s <= 1.0


class TestRankAgainstCorpus:
    def test_verbatim_query_ranks_first_with_similarity_one(self, model):
        params, table = model
        candidates = ["dog fever", "how you treat cat cold", "flu cure"]
        ranked = rank_against_corpus(
            params, table, "how you treat cat cold", candidates, k=2, max_len=6
        )
        assert ranked[0][0] == 1
        assert ranked[0][1] == pytest.approx(1.0, abs=1e-9)

    def test_k_larger_than_candidates_returns_all_sorted(self, model):
        params, table = model
        candidates = ["cat", "dog", "fever"]
        ranked = rank_against_corpus(params, table, "cat cold", candidates, k=10, max_len=4)
        assert len(ranked) == 3
        sims = [s for _, s in ranked]
        assert sims == sorted(sims, reverse=True)

    def test_matches_sequential_scoring_oracle(self, model):
        params, table = model
        candidates = ["cat cold", "dog fever flu", "treat you", "what cure", "cold cold"]
        ranked = rank_against_corpus(params, table, "cat flu", candidates, k=5, max_len=5)
        oracle = []
        for i, cand in enumerate(candidates):
            s = score_pair(params, table, "cat flu", cand, max_len=5).similarity
            oracle.append((i, s))
        oracle.sort(key=lambda pair: (-pair[1], pair[0]))
        assert [i for i, _ in ranked] == [i for i, _ in oracle]
        for (_, a), (_, b) in zip(ranked, oracle):
            assert a == pytest.approx(b, abs=1e-12)

    def test_ties_break_by_lower_index(self, model):
        params, table = model
        candidates = ["cat cold", "cat cold", "cat cold"]
        ranked = rank_against_corpus(params, table, "cat cold", candidates, k=3, max_len=4)
        assert [i for i, _ in ranked] == [0, 1, 2]

    def test_unscorable_candidates_skipped(self, model):
        params, table = model
        ranked = rank_against_corpus(params, table, "cat", ["", "cat", "?!"], k=3, max_len=4)
        assert [i for i, _ in ranked] == [1]

    def test_bad_arguments_rejected(self, model):
        params, table = model
        with pytest.raises(ValueError, match="k"):
            rank_against_corpus(params, table, "cat", ["dog"], k=0, max_len=4)
        with pytest.raises(ValueError, match="candidates"):
            rank_against_corpus(params, table, "cat", [], k=1, max_len=4)
