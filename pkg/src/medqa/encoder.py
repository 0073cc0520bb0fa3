"""Sentence encoder: BiLSTM over embedded tokens, pooled by word attention.

The forward math per token, with [h, x] the concatenation of the previous
hidden state and the current input:

    g    = sigmoid(W_forget·[h,x] + b_forget)     remember/forget old state
    j    = sigmoid(W_input·[h,x] + b_input)       admit new candidate
    cand = tanh(W_cand·[h,x] + b_cand)
    c    = g*c_prev + j*cand
    q    = sigmoid(W_output·[h,x] + b_output)
    h    = q*tanh(c)

Two independent cells run left-to-right and right-to-left; each token's
state is the concatenation of both directions. Word attention projects the
states, scores them against a learned context vector, normalizes with a
masked softmax, and pools the states by those weights.

Pad positions emit zero states and never advance either recurrence, so an
encoding is invariant to how much padding follows the real tokens.

Backpropagation through all of it is written by hand below and verified
against central finite differences in the test suite. Internals operate on
(batch, time, feature) arrays; the public per-sentence functions wrap a
batch of one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numeric import ShapeError, as_matrix, as_vector

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# Parameter containers


@dataclass(eq=False)
class LstmCell:
    """One direction's gate parameters.

    Weight matrices are (hidden, hidden+input): they act on [h_prev, x].
    """

    w_forget: np.ndarray
    w_input: np.ndarray
    w_cand: np.ndarray
    w_output: np.ndarray
    b_forget: np.ndarray
    b_input: np.ndarray
    b_cand: np.ndarray
    b_output: np.ndarray

    def __post_init__(self):
        ws = [self.w_forget, self.w_input, self.w_cand, self.w_output]
        bs = [self.b_forget, self.b_input, self.b_cand, self.b_output]
        shape = ws[0].shape
        for w in ws:
            if w.shape != shape:
                raise ShapeError("all gate weight matrices must share one shape")
        for b in bs:
            if b.shape != (shape[0],):
                raise ShapeError("all gate biases must match the weight row count")
        if shape[1] <= shape[0]:
            raise ShapeError("weight columns must exceed hidden size (room for the input)")

    @property
    def hidden(self) -> int:
        return self.w_forget.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_forget.shape[1] - self.w_forget.shape[0]

    def weights_and_biases(self):
        return [
            ("w_forget", self.w_forget),
            ("w_input", self.w_input),
            ("w_cand", self.w_cand),
            ("w_output", self.w_output),
            ("b_forget", self.b_forget),
            ("b_input", self.b_input),
            ("b_cand", self.b_cand),
            ("b_output", self.b_output),
        ]


@dataclass(eq=False)
class AttentionParams:
    """Word-attention parameters: projection, bias, and scoring context vector."""

    proj: np.ndarray
    proj_bias: np.ndarray
    context: np.ndarray

    def __post_init__(self):
        p = as_matrix(self.proj, "attention projection")
        if self.proj_bias.shape != (p.shape[0],):
            raise ShapeError("attention bias must match projection rows")
        if self.context.shape != (p.shape[0],):
            raise ShapeError("attention context vector must match projection rows")
        if not np.any(self.context):
            raise ValueError("attention context vector must be nonzero")

    @property
    def attn_dim(self) -> int:
        return self.proj.shape[0]

    @property
    def state_dim(self) -> int:
        return self.proj.shape[1]


@dataclass(eq=False)
class EncoderParams:
    """The full shared (Siamese) weight set plus its defining dimensions."""

    forward_cell: LstmCell
    backward_cell: LstmCell
    attention: AttentionParams
    hidden: int
    embedding_dim: int
    seed: int

    def __post_init__(self):
        for cell in (self.forward_cell, self.backward_cell):
            if cell.hidden != self.hidden or cell.input_size != self.embedding_dim:
                raise ShapeError("cell dimensions disagree with declared sizes")
        if self.attention.state_dim != 2 * self.hidden:
            raise ShapeError("attention must act on concatenated two-direction states")

    @property
    def attn_dim(self) -> int:
        return self.attention.attn_dim


@dataclass
class SentenceEncoding:
    """Per-token states, their attention weights, and the pooled sentence vector."""

    token_states: np.ndarray
    attention_weights: np.ndarray
    pooled: np.ndarray


# ---------------------------------------------------------------------------
# Initialization


def _init_cell(hidden: int, input_size: int, rng: np.random.Generator) -> LstmCell:
    bound = 1.0 / math.sqrt(hidden + input_size)
    shape = (hidden, hidden + input_size)

    def w():
        return rng.uniform(-bound, bound, size=shape)

    return LstmCell(
        w_forget=w(), w_input=w(), w_cand=w(), w_output=w(),
        b_forget=np.zeros(hidden), b_input=np.zeros(hidden),
        b_cand=np.zeros(hidden), b_output=np.zeros(hidden),
    )


def init_params(
    hidden: int, embedding_dim: int, attn_dim: int | None = None, seed: int = 0
) -> EncoderParams:
    """Seeded initialization: weights uniform in +-1/sqrt(fan_in), biases zero.

    attn_dim defaults to 2*hidden (a square attention projection). A single
    generator drives every draw, so (dims, seed) fully determine the result.
    """
    if hidden < 1 or embedding_dim < 1:
        raise ValueError("hidden and embedding_dim must be >= 1")
    a_dim = 2 * hidden if attn_dim is None else attn_dim
    if a_dim < 1:
        raise ValueError("attn_dim must be >= 1")
    rng = np.random.default_rng(seed)
    fwd = _init_cell(hidden, embedding_dim, rng)
    bwd = _init_cell(hidden, embedding_dim, rng)
    proj_bound = 1.0 / math.sqrt(2 * hidden)
    proj = rng.uniform(-proj_bound, proj_bound, size=(a_dim, 2 * hidden))
    context = rng.uniform(-1.0, 1.0, size=a_dim)
    while not np.any(context):  # astronomically unlikely, but the contract says nonzero
        context = rng.uniform(-1.0, 1.0, size=a_dim)
    attention = AttentionParams(proj=proj, proj_bias=np.zeros(a_dim), context=context)
    return EncoderParams(
        forward_cell=fwd, backward_cell=bwd, attention=attention,
        hidden=hidden, embedding_dim=embedding_dim, seed=seed,
    )


# ---------------------------------------------------------------------------
# Forward ops (public, per-sentence)


def lstm_step(cell: LstmCell, h_prev, c_prev, x) -> tuple[np.ndarray, np.ndarray]:
    """One recurrence step; returns the new (h, c)."""
    h_prev = as_vector(h_prev, "h_prev")
    c_prev = as_vector(c_prev, "c_prev")
    x = as_vector(x, "x")
    if h_prev.shape[0] != cell.hidden or c_prev.shape[0] != cell.hidden:
        raise ShapeError(
            f"state length {h_prev.shape[0]}/{c_prev.shape[0]} does not match hidden {cell.hidden}"
        )
    if x.shape[0] != cell.input_size:
        raise ShapeError(f"input length {x.shape[0]} does not match cell input {cell.input_size}")
    inp = np.concatenate([h_prev, x])
    g = _sigm(cell.w_forget @ inp + cell.b_forget)
    j = _sigm(cell.w_input @ inp + cell.b_input)
    cand = np.tanh(cell.w_cand @ inp + cell.b_cand)
    q = _sigm(cell.w_output @ inp + cell.b_output)
    c = g * c_prev + j * cand
    h = q * np.tanh(c)
    return h, c


def bilstm_encode(params: EncoderParams, embedded, mask) -> np.ndarray:
    """Per-token states (T, 2*hidden): forward and backward runs, concatenated."""
    X, M = _as_batch_of_one(embedded, mask, params.embedding_dim)
    fwd, _ = _dir_forward(params.forward_cell, X, M, reverse=False)
    bwd, _ = _dir_forward(params.backward_cell, X, M, reverse=True)
    return np.concatenate([fwd, bwd], axis=2)[0]


def attention_pool(attention: AttentionParams, token_states, mask) -> SentenceEncoding:
    """Score, normalize, and pool token states; pads get exactly zero weight."""
    states = as_matrix(np.asarray(token_states, dtype=np.float64), "token_states")
    m = np.asarray(mask, dtype=bool)
    if m.shape != (states.shape[0],):
        raise ShapeError("mask length must match token count")
    if not m.any():
        raise ValueError("attention_pool: no real tokens to pool")
    if states.shape[1] != attention.state_dim:
        raise ShapeError(
            f"token states of width {states.shape[1]} do not match attention input {attention.state_dim}"
        )
    pooled, alpha, _ = _attention_forward(attention, states[None], m[None])
    return SentenceEncoding(
        token_states=states, attention_weights=alpha[0], pooled=pooled[0]
    )


def encode(params: EncoderParams, embedded, mask) -> SentenceEncoding:
    """Full encoder: BiLSTM token states pooled by word attention."""
    states = bilstm_encode(params, embedded, mask)
    return attention_pool(params.attention, states, mask)


# ---------------------------------------------------------------------------
# Batched internals (training path)


def _sigm(z):
    # Stable componentwise logistic; scipy.special.expit without the import
    # cost in the hot loop's inner scope.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _as_batch_of_one(embedded, mask, dim: int):
    X = np.asarray(embedded, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"embedded input must be (time, dim), got {X.shape}")
    if X.shape[1] != dim:
        raise ShapeError(f"embedding width {X.shape[1]} does not match encoder dim {dim}")
    M = np.asarray(mask, dtype=bool)
    if M.shape != (X.shape[0],):
        raise ShapeError("mask length must match sequence length")
    return X[None], M[None]


def _dir_forward(cell: LstmCell, X: np.ndarray, M: np.ndarray, reverse: bool):
    """One direction over a batch. Returns (states (B,T,H), cache).

    At masked steps the carried (h, c) pass through unchanged and the
    emitted state is zero.
    """
    B, T, _ = X.shape
    H = cell.hidden
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    states = np.zeros((B, T, H))
    cache = []
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        m = M[:, t:t + 1]
        inp = np.concatenate([h, X[:, t, :]], axis=1)
        g = _sigm(inp @ cell.w_forget.T + cell.b_forget)
        j = _sigm(inp @ cell.w_input.T + cell.b_input)
        cand = np.tanh(inp @ cell.w_cand.T + cell.b_cand)
        q = _sigm(inp @ cell.w_output.T + cell.b_output)
        c_new = g * c + j * cand
        tc = np.tanh(c_new)
        h_new = q * tc
        states[:, t, :] = np.where(m, h_new, 0.0)
        cache.append((t, inp, g, j, cand, q, c.copy(), tc))
        h = np.where(m, h_new, h)
        c = np.where(m, c_new, c)
    return states, cache


def _zero_cell_like(cell: LstmCell) -> LstmCell:
    return LstmCell(
        w_forget=np.zeros_like(cell.w_forget), w_input=np.zeros_like(cell.w_input),
        w_cand=np.zeros_like(cell.w_cand), w_output=np.zeros_like(cell.w_output),
        b_forget=np.zeros_like(cell.b_forget), b_input=np.zeros_like(cell.b_input),
        b_cand=np.zeros_like(cell.b_cand), b_output=np.zeros_like(cell.b_output),
    )


def _dir_backward(cell: LstmCell, M: np.ndarray, cache, dStates: np.ndarray):
    """Backpropagate one direction. Returns (cell gradients, dX).

    dStates is the gradient w.r.t. the emitted states. Masked steps pass
    gradients straight through the carried state, mirroring the forward
    pass-through, and contribute nothing to the parameter gradients.
    """
    B, T, H = dStates.shape
    grads = _zero_cell_like(cell)
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    dX = np.zeros((B, T, cell.input_size))
    for (t, inp, g, j, cand, q, c_prev, tc) in reversed(cache):
        m = M[:, t:t + 1]
        # Emitted state is zero at pads: its incoming gradient is dropped there.
        dh_new = np.where(m, dh + dStates[:, t, :], 0.0)
        dc_new = np.where(m, dc, 0.0) + dh_new * q * (1.0 - tc * tc)
        dq = dh_new * tc
        dz_q = dq * q * (1.0 - q)
        dg = dc_new * c_prev
        dz_g = dg * g * (1.0 - g)
        dj = dc_new * cand
        dz_j = dj * j * (1.0 - j)
        dcand = dc_new * j
        dz_c = dcand * (1.0 - cand * cand)
        dinp = dz_g @ cell.w_forget + dz_j @ cell.w_input
        dinp += dz_c @ cell.w_cand + dz_q @ cell.w_output
        grads.w_forget += dz_g.T @ inp
        grads.w_input += dz_j.T @ inp
        grads.w_cand += dz_c.T @ inp
        grads.w_output += dz_q.T @ inp
        grads.b_forget += dz_g.sum(axis=0)
        grads.b_input += dz_j.sum(axis=0)
        grads.b_cand += dz_c.sum(axis=0)
        grads.b_output += dz_q.sum(axis=0)
        dh = np.where(m, dinp[:, :H], dh)
        dc = np.where(m, dc_new * g, dc)
        dX[:, t, :] = dinp[:, H:]
    return grads, dX


def _masked_softmax_rows(E: np.ndarray, M: np.ndarray) -> np.ndarray:
    if not M.any(axis=1).all():
        raise ValueError("every sequence needs at least one real token")
    mx = np.max(np.where(M, E, -np.inf), axis=1, keepdims=True)
    ex = np.exp(np.where(M, E - mx, -np.inf))
    return ex / ex.sum(axis=1, keepdims=True)


def _attention_forward(attn: AttentionParams, Hcat: np.ndarray, M: np.ndarray):
    """Returns (pooled (B,2H), alpha (B,T), cache)."""
    Z = np.einsum("bta,ka->btk", Hcat, attn.proj) + attn.proj_bias
    U = np.tanh(Z)
    E = U @ attn.context
    alpha = _masked_softmax_rows(E, M)
    pooled = np.einsum("bt,bta->ba", alpha, Hcat)
    return pooled, alpha, (Hcat, U, alpha)


def _attention_backward(attn: AttentionParams, cache, dPooled: np.ndarray):
    """Returns (dproj, dproj_bias, dcontext, dHcat)."""
    Hcat, U, alpha = cache
    dalpha = np.einsum("ba,bta->bt", dPooled, Hcat)
    dHcat = alpha[:, :, None] * dPooled[:, None, :]
    # Softmax backward; alpha is 0 at pads, so dE vanishes there with it.
    dE = alpha * (dalpha - np.sum(alpha * dalpha, axis=1, keepdims=True))
    dcontext = np.einsum("bt,btk->k", dE, U)
    dU = dE[:, :, None] * attn.context
    dZ = dU * (1.0 - U * U)
    dproj = np.einsum("btk,bta->ka", dZ, Hcat)
    dproj_bias = dZ.sum(axis=(0, 1))
    dHcat += np.einsum("btk,ka->bta", dZ, attn.proj)
    return dproj, dproj_bias, dcontext, dHcat


def encode_batch(params: EncoderParams, X: np.ndarray, M: np.ndarray):
    """Pooled encodings for a whole batch. Returns (pooled (B,2H), cache)."""
    fwd_states, fwd_cache = _dir_forward(params.forward_cell, X, M, reverse=False)
    bwd_states, bwd_cache = _dir_forward(params.backward_cell, X, M, reverse=True)
    Hcat = np.concatenate([fwd_states, bwd_states], axis=2)
    pooled, alpha, att_cache = _attention_forward(params.attention, Hcat, M)
    return pooled, (M, fwd_cache, bwd_cache, att_cache, alpha)


def encode_batch_backward(params: EncoderParams, cache, dPooled: np.ndarray) -> EncoderParams:
    """Gradients of a scalar loss w.r.t. every parameter, given dLoss/dPooled.

    Returned as an EncoderParams-shaped container so it flattens with the
    same layout as the parameters themselves.
    """
    M, fwd_cache, bwd_cache, att_cache, _ = cache
    dproj, dproj_bias, dcontext, dHcat = _attention_backward(
        params.attention, att_cache, dPooled
    )
    H = params.hidden
    fwd_grads, _ = _dir_backward(params.forward_cell, M, fwd_cache, dHcat[:, :, :H])
    bwd_grads, _ = _dir_backward(params.backward_cell, M, bwd_cache, dHcat[:, :, H:])
    grads_attention = AttentionParams.__new__(AttentionParams)
    grads_attention.proj = dproj
    grads_attention.proj_bias = dproj_bias
    grads_attention.context = dcontext
    out = EncoderParams.__new__(EncoderParams)
    out.forward_cell = fwd_grads
    out.backward_cell = bwd_grads
    out.attention = grads_attention
    out.hidden = params.hidden
    out.embedding_dim = params.embedding_dim
    out.seed = params.seed
    return out


# ---------------------------------------------------------------------------
# Flattening (for the optimizer and the finite-difference oracle)


def param_slices(hidden: int, embedding_dim: int, attn_dim: int):
    """Named slices mapping every parameter into one flat vector.

    Order: forward cell, backward cell, attention; weights before biases
    within each cell, matching the declaration order of the containers.
    """
    sizes = []
    cell_w = hidden * (hidden + embedding_dim)
    for direction in ("forward", "backward"):
        for gate in ("w_forget", "w_input", "w_cand", "w_output"):
            sizes.append((f"{direction}.{gate}", cell_w))
        for gate in ("b_forget", "b_input", "b_cand", "b_output"):
            sizes.append((f"{direction}.{gate}", hidden))
    sizes.append(("attention.proj", attn_dim * 2 * hidden))
    sizes.append(("attention.proj_bias", attn_dim))
    sizes.append(("attention.context", attn_dim))
    slices = []
    offset = 0
    for name, size in sizes:
        slices.append((name, slice(offset, offset + size)))
        offset += size
    return slices


def _cell_arrays(cell: LstmCell):
    return [cell.w_forget, cell.w_input, cell.w_cand, cell.w_output,
            cell.b_forget, cell.b_input, cell.b_cand, cell.b_output]


def flatten_params(params: EncoderParams) -> np.ndarray:
    parts = []
    for cell in (params.forward_cell, params.backward_cell):
        parts.extend(a.ravel() for a in _cell_arrays(cell))
    parts.append(params.attention.proj.ravel())
    parts.append(params.attention.proj_bias.ravel())
    parts.append(params.attention.context.ravel())
    return np.concatenate(parts)


def unflatten_params(
    flat: np.ndarray, hidden: int, embedding_dim: int, attn_dim: int, seed: int = 0
) -> EncoderParams:
    flat = as_vector(flat, "flat parameters")
    slices = dict(param_slices(hidden, embedding_dim, attn_dim))
    expected = max(sl.stop for sl in slices.values())
    if flat.shape[0] != expected:
        raise ShapeError(f"flat vector has {flat.shape[0]} entries, expected {expected}")
    w_shape = (hidden, hidden + embedding_dim)

    def cell(direction: str) -> LstmCell:
        def take(gate, shape):
            return flat[slices[f"{direction}.{gate}"]].reshape(shape).copy()

        return LstmCell(
            w_forget=take("w_forget", w_shape), w_input=take("w_input", w_shape),
            w_cand=take("w_cand", w_shape), w_output=take("w_output", w_shape),
            b_forget=take("b_forget", hidden), b_input=take("b_input", hidden),
            b_cand=take("b_cand", hidden), b_output=take("b_output", hidden),
        )

    proj = flat[slices["attention.proj"]].reshape(attn_dim, 2 * hidden).copy()
    bias = flat[slices["attention.proj_bias"]].copy()
    context = flat[slices["attention.context"]].copy()
    attention = AttentionParams.__new__(AttentionParams)
    attention.proj = proj
    attention.proj_bias = bias
    attention.context = context
    return EncoderParams(
        forward_cell=cell("forward"), backward_cell=cell("backward"),
        attention=attention, hidden=hidden, embedding_dim=embedding_dim, seed=seed,
    )


# ---------------------------------------------------------------------------
# Serialization


def save_params(params: EncoderParams, path) -> None:
    """Write a self-describing model file; round-trips bit-exactly."""
    arrays = {}
    for prefix, cell in (("fwd", params.forward_cell), ("bwd", params.backward_cell)):
        for name, arr in cell.weights_and_biases():
            arrays[f"{prefix}_{name}"] = arr
    arrays["att_proj"] = params.attention.proj
    arrays["att_proj_bias"] = params.attention.proj_bias
    arrays["att_context"] = params.attention.context
    np.savez(
        path,
        format_version=np.int64(FORMAT_VERSION),
        hidden=np.int64(params.hidden),
        embedding_dim=np.int64(params.embedding_dim),
        attn_dim=np.int64(params.attn_dim),
        seed=np.int64(params.seed),
        **arrays,
    )


def load_params(path) -> EncoderParams:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        hidden = int(data["hidden"])
        embedding_dim = int(data["embedding_dim"])
        seed = int(data["seed"])

        def cell(prefix: str) -> LstmCell:
            return LstmCell(
                w_forget=data[f"{prefix}_w_forget"], w_input=data[f"{prefix}_w_input"],
                w_cand=data[f"{prefix}_w_cand"], w_output=data[f"{prefix}_w_output"],
                b_forget=data[f"{prefix}_b_forget"], b_input=data[f"{prefix}_b_input"],
                b_cand=data[f"{prefix}_b_cand"], b_output=data[f"{prefix}_b_output"],
            )

        attention = AttentionParams(
            proj=data["att_proj"], proj_bias=data["att_proj_bias"],
            context=data["att_context"],
        )
        return EncoderParams(
            forward_cell=cell("fwd"), backward_cell=cell("bwd"), attention=attention,
            hidden=hidden, embedding_dim=embedding_dim, seed=seed,
        )
