"""Encoder math: LSTM closed forms, BiLSTM symmetry, attention, gradients."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medqa.encoder import (
    AttentionParams,
    EncoderParams,
    LstmCell,
    attention_pool,
    bilstm_encode,
    encode,
    encode_batch,
    encode_batch_backward,
    flatten_params,
    init_params,
    load_params,
    lstm_step,
    param_slices,
    save_params,
    unflatten_params,
)
from medqa.numeric import ShapeError, check_gradients


def zero_cell(hidden: int, input_size: int) -> LstmCell:
    shape = (hidden, hidden + input_size)
    return LstmCell(
        w_forget=np.zeros(shape), w_input=np.zeros(shape),
        w_cand=np.zeros(shape), w_output=np.zeros(shape),
        b_forget=np.zeros(hidden), b_input=np.zeros(hidden),
        b_cand=np.zeros(hidden), b_output=np.zeros(hidden),
    )


class TestLstmStep:
    def test_all_zero_params_and_state(self):
        cell = zero_cell(2, 3)
        h, c = lstm_step(cell, np.zeros(2), np.zeros(2), np.zeros(3))
        # gates are 0.5, candidate 0: nothing enters the state
        assert np.array_equal(h, np.zeros(2))
        assert np.array_equal(c, np.zeros(2))

    def test_zero_params_nonzero_cell_state(self):
        cell = zero_cell(1, 1)
        h, c = lstm_step(cell, np.zeros(1), np.ones(1), np.zeros(1))
        # forget gate 0.5 halves the old state; output gate 0.5 scales tanh
        assert c[0] == pytest.approx(0.5, abs=1e-12)
        assert h[0] == pytest.approx(0.5 * math.tanh(0.5), abs=1e-12)

    def test_state_shape_mismatch(self):
        cell = zero_cell(2, 3)
        with pytest.raises(ShapeError):
            lstm_step(cell, np.zeros(3), np.zeros(2), np.zeros(3))

    def test_input_shape_mismatch(self):
        cell = zero_cell(2, 3)
        with pytest.raises(ShapeError):
            lstm_step(cell, np.zeros(2), np.zeros(2), np.zeros(4))

    def test_matches_batched_forward(self):
        params = init_params(hidden=3, embedding_dim=2, seed=5)
        cell = params.forward_cell
        rng = np.random.default_rng(0)
        x = rng.normal(size=(4, 2))
        h = np.zeros(3)
        c = np.zeros(3)
        singles = []
        for t in range(4):
            h, c = lstm_step(cell, h, c, x[t])
            singles.append(h.copy())
        states = bilstm_encode(params, x, np.ones(4, dtype=bool))
        assert np.allclose(states[:, :3], np.array(singles), atol=1e-10)


class TestBilstmEncode:
    def test_single_real_token_concatenates_one_step_each_direction(self):
        params = init_params(hidden=2, embedding_dim=3, seed=1)
        x = np.random.default_rng(2).normal(size=(4, 3))
        x[1:] = 0.0
        mask = np.array([True, False, False, False])
        states = bilstm_encode(params, x, mask)
        hf, _ = lstm_step(params.forward_cell, np.zeros(2), np.zeros(2), x[0])
        hb, _ = lstm_step(params.backward_cell, np.zeros(2), np.zeros(2), x[0])
        assert np.allclose(states[0], np.concatenate([hf, hb]), atol=1e-12)

    def test_pad_positions_emit_zero_states(self):
        params = init_params(hidden=2, embedding_dim=3, seed=1)
        x = np.random.default_rng(3).normal(size=(5, 3))
        x[2:] = 0.0
        mask = np.array([True, True, False, False, False])
        states = bilstm_encode(params, x, mask)
        assert np.array_equal(states[2:], np.zeros((3, 4)))

    def test_all_pad_input_gives_all_zero_states(self):
        params = init_params(hidden=2, embedding_dim=3, seed=1)
        states = bilstm_encode(params, np.zeros((3, 3)), np.zeros(3, dtype=bool))
        assert np.array_equal(states, np.zeros((3, 4)))

    def test_reversed_input_mirrors_states_when_cells_shared(self):
        # With identical forward/backward cells, encoding the reversed
        # sentence swaps direction roles: state of reversed position T-1-t
        # equals the original position t with its halves exchanged.
        base = init_params(hidden=3, embedding_dim=2, seed=7)
        params = EncoderParams(
            forward_cell=base.forward_cell, backward_cell=base.forward_cell,
            attention=base.attention, hidden=3, embedding_dim=2, seed=7,
        )
        rng = np.random.default_rng(11)
        x = rng.normal(size=(4, 2))
        mask = np.ones(4, dtype=bool)
        fwd = bilstm_encode(params, x, mask)
        rev = bilstm_encode(params, x[::-1].copy(), mask)
        for t in range(4):
            swapped = np.concatenate([rev[3 - t][3:], rev[3 - t][:3]])
            assert np.allclose(fwd[t], swapped, atol=1e-12)

    def test_extra_padding_does_not_change_real_states(self):
        params = init_params(hidden=2, embedding_dim=3, seed=4)
        rng = np.random.default_rng(8)
        tokens = rng.normal(size=(2, 3))
        short = np.concatenate([tokens, np.zeros((1, 3))])
        long = np.concatenate([tokens, np.zeros((5, 3))])
        s_short = bilstm_encode(params, short, np.array([True, True, False]))
        s_long = bilstm_encode(params, long, np.array([True, True] + [False] * 5))
        assert np.allclose(s_short[:2], s_long[:2], atol=1e-12)


class TestAttentionPool:
    def test_single_real_token_takes_all_weight(self):
        params = init_params(hidden=2, embedding_dim=2, seed=0)
        states = np.random.default_rng(1).normal(size=(3, 4))
        mask = np.array([True, False, False])
        enc = attention_pool(params.attention, states, mask)
        assert enc.attention_weights[0] == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(enc.attention_weights[1:], [0.0, 0.0])
        assert np.allclose(enc.pooled, states[0], atol=1e-12)

    def test_identical_states_share_weight_equally(self):
        params = init_params(hidden=2, embedding_dim=2, seed=0)
        state = np.random.default_rng(2).normal(size=4)
        states = np.stack([state, state])
        enc = attention_pool(params.attention, states, np.array([True, True]))
        assert np.allclose(enc.attention_weights, [0.5, 0.5], atol=1e-12)
        assert np.allclose(enc.pooled, state, atol=1e-12)

    def test_all_masked_rejected(self):
        params = init_params(hidden=2, embedding_dim=2, seed=0)
        with pytest.raises(ValueError, match="real token"):
            attention_pool(params.attention, np.zeros((2, 4)), np.array([False, False]))

    def test_pooled_equals_weighted_sum(self):
        params = init_params(hidden=3, embedding_dim=2, seed=9)
        rng = np.random.default_rng(9)
        states = rng.normal(size=(5, 6))
        mask = np.array([True, True, True, False, False])
        enc = attention_pool(params.attention, states, mask)
        manual = (enc.attention_weights[:, None] * states).sum(axis=0)
        assert np.allclose(enc.pooled, manual, atol=1e-9)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_weights_normalized_zero_on_pads(self, seed):
        rng = np.random.default_rng(seed)
        hidden = int(rng.integers(1, 4))
        t_len = int(rng.integers(1, 8))
        params = init_params(hidden=hidden, embedding_dim=2, seed=seed % 1000)
        states = rng.normal(size=(t_len, 2 * hidden))
        mask = rng.random(t_len) < 0.6
        if not mask.any():
            mask[int(rng.integers(t_len))] = True
        enc = attention_pool(params.attention, states, mask)
        w = enc.attention_weights
        assert (w >= 0.0).all()
        assert (w[~mask] == 0.0).all()
        assert w.sum() == pytest.approx(1.0, abs=1e-6)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_pooled_within_convex_hull(self, seed):
        rng = np.random.default_rng(seed)
        params = init_params(hidden=2, embedding_dim=2, seed=seed % 997)
        states = rng.normal(size=(4, 4))
        mask = rng.random(4) < 0.7
        if not mask.any():
            mask[0] = True
        enc = attention_pool(params.attention, states, mask)
        live = states[mask]
        assert (enc.pooled >= live.min(axis=0) - 1e-9).all()
        assert (enc.pooled <= live.max(axis=0) + 1e-9).all()


class TestEncode:
    def test_attention_ignores_pad_states(self):
        params = init_params(hidden=2, embedding_dim=3, seed=6)
        rng = np.random.default_rng(12)
        tokens = rng.normal(size=(2, 3))
        short = np.concatenate([tokens, np.zeros((2, 3))])
        long = np.concatenate([tokens, np.zeros((6, 3))])
        enc_short = encode(params, short, np.array([True, True, False, False]))
        enc_long = encode(params, long, np.array([True, True] + [False] * 6))
        assert np.allclose(enc_short.pooled, enc_long.pooled, atol=1e-12)
        assert np.allclose(
            enc_short.attention_weights[:2], enc_long.attention_weights[:2], atol=1e-12
        )

    def test_matches_batched_path(self):
        params = init_params(hidden=3, embedding_dim=4, seed=13)
        rng = np.random.default_rng(13)
        X = rng.normal(size=(3, 5, 4))
        M = np.ones((3, 5), dtype=bool)
        M[0, 3:] = False
        M[2, 1:] = False
        X[~M] = 0.0
        pooled_batch, _ = encode_batch(params, X, M)
        for b in range(3):
            enc = encode(params, X[b], M[b])
            assert np.allclose(enc.pooled, pooled_batch[b], atol=1e-10)


class TestGradients:
    def _loss_and_grads(self, params, X, M, probe):
        pooled, cache = encode_batch(params, X, M)
        loss = float(np.sum(pooled * probe))
        grads = encode_batch_backward(params, cache, probe.copy())
        return loss, grads

    def test_full_encoder_gradients_match_finite_differences(self):
        hidden, dim, attn_dim, T = 3, 2, 4, 3
        params = init_params(hidden=hidden, embedding_dim=dim, attn_dim=attn_dim, seed=21)
        rng = np.random.default_rng(22)
        X = rng.normal(size=(2, T, dim))
        M = np.array([[True, True, True], [True, True, False]])
        X[~M] = 0.0
        probe = rng.normal(size=(2, 2 * hidden))

        _, grads = self._loss_and_grads(params, X, M, probe)
        analytic = flatten_params(grads)

        def f(flat):
            p = unflatten_params(flat, hidden, dim, attn_dim)
            pooled, _ = encode_batch(p, X, M)
            return float(np.sum(pooled * probe))

        reports = check_gradients(
            f, flatten_params(params), analytic, param_slices(hidden, dim, attn_dim)
        )
        for r in reports:
            assert r.ok, f"{r.name}: rel err {r.max_relative_error:.3e}"

    def test_masked_steps_contribute_no_gradient(self):
        # Gradients must be identical whether pads carry junk or zeros.
        hidden, dim = 2, 2
        params = init_params(hidden=hidden, embedding_dim=dim, seed=30)
        rng = np.random.default_rng(31)
        X = rng.normal(size=(1, 4, dim))
        M = np.array([[True, True, False, False]])
        probe = rng.normal(size=(1, 2 * hidden))
        X_zero = X.copy()
        X_zero[~M] = 0.0
        _, g_zero = self._loss_and_grads(params, X_zero, M, probe)
        _, g_junk = self._loss_and_grads(params, X, M, probe)
        assert np.allclose(flatten_params(g_zero), flatten_params(g_junk), atol=1e-12)


class TestFlattening:
    def test_round_trip(self):
        params = init_params(hidden=3, embedding_dim=4, attn_dim=5, seed=17)
        flat = flatten_params(params)
        back = unflatten_params(flat, 3, 4, 5, seed=17)
        assert np.array_equal(flatten_params(back), flat)
        assert np.array_equal(back.forward_cell.w_cand, params.forward_cell.w_cand)
        assert np.array_equal(back.attention.context, params.attention.context)

    def test_slices_cover_vector_exactly(self):
        params = init_params(hidden=2, embedding_dim=3, seed=1)
        flat = flatten_params(params)
        slices = param_slices(2, 3, params.attn_dim)
        covered = sum(sl.stop - sl.start for _, sl in slices)
        assert covered == flat.shape[0]
        assert slices[0][1].start == 0
        assert slices[-1][1].stop == flat.shape[0]

    def test_wrong_length_rejected(self):
        with pytest.raises(ShapeError, match="entries"):
            unflatten_params(np.zeros(7), 2, 3, 4)


class TestInit:
    def test_deterministic_per_seed(self):
        a = init_params(hidden=4, embedding_dim=3, seed=42)
        b = init_params(hidden=4, embedding_dim=3, seed=42)
        assert np.array_equal(flatten_params(a), flatten_params(b))

    def test_seeds_differ(self):
        a = init_params(hidden=4, embedding_dim=3, seed=1)
        b = init_params(hidden=4, embedding_dim=3, seed=2)
        assert not np.array_equal(flatten_params(a), flatten_params(b))

    def test_biases_zero_weights_bounded(self):
        p = init_params(hidden=5, embedding_dim=7, seed=3)
        bound = 1.0 / math.sqrt(12)
        for cell in (p.forward_cell, p.backward_cell):
            assert np.array_equal(cell.b_forget, np.zeros(5))
            assert np.array_equal(cell.b_output, np.zeros(5))
            assert (np.abs(cell.w_forget) <= bound).all()
            assert (np.abs(cell.w_cand) <= bound).all()
        assert np.any(p.attention.context)

    def test_attn_dim_defaults_to_twice_hidden(self):
        p = init_params(hidden=6, embedding_dim=2, seed=0)
        assert p.attn_dim == 12

    def test_bad_dims_rejected(self):
        with pytest.raises(ValueError):
            init_params(hidden=0, embedding_dim=3)
        with pytest.raises(ValueError):
            init_params(hidden=2, embedding_dim=3, attn_dim=0)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        params = init_params(hidden=4, embedding_dim=5, attn_dim=6, seed=99)
        path = tmp_path / "model.npz"
        save_params(params, path)
        loaded = load_params(path)
        assert loaded.hidden == 4
        assert loaded.embedding_dim == 5
        assert loaded.attn_dim == 6
        assert loaded.seed == 99
        assert np.array_equal(flatten_params(loaded), flatten_params(params))

    def test_unknown_version_rejected(self, tmp_path):
        params = init_params(hidden=2, embedding_dim=2, seed=0)
        path = tmp_path / "model.npz"
        save_params(params, path)
        import numpy as np_mod

        with np_mod.load(path) as data:
            arrays = {k: data[k] for k in data.files}
        arrays["format_version"] = np_mod.int64(999)
        np_mod.savez(path, **arrays)
        with pytest.raises(ValueError, match="version"):
            load_params(path)


class TestParamValidation:
    def test_mismatched_gate_shapes_rejected(self):
        with pytest.raises(ShapeError):
            LstmCell(
                w_forget=np.zeros((2, 5)), w_input=np.zeros((2, 4)),
                w_cand=np.zeros((2, 5)), w_output=np.zeros((2, 5)),
                b_forget=np.zeros(2), b_input=np.zeros(2),
                b_cand=np.zeros(2), b_output=np.zeros(2),
            )

    def test_zero_context_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            AttentionParams(proj=np.ones((3, 4)), proj_bias=np.zeros(3), context=np.zeros(3))
