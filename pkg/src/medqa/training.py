"""Training and evaluation of the similarity encoder on labeled pairs.

Loss is the mean squared error between the pair similarity and its 0/1
duplicate label. Updates use a per-parameter adaptive step (first/second
moment decay 0.9/0.999) over one flat parameter vector.

Reproducibility contract: given the same config (seed included) and the
same pair order, training is bit-identical. The only randomness is the
seeded epoch shuffle; epoch losses are accumulated per pair in the pairs'
original index order so the reported history does not depend on shuffle
order either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .embeddings import EmbeddingTable, embed_sequence, tokenize
from .encoder import (
    EncoderParams,
    encode_batch,
    encode_batch_backward,
    flatten_params,
    init_params,
    unflatten_params,
)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 50
    hidden: int = 16
    embedding_dim: int = 24
    max_seq_length: int = 10
    learning_rate: float = 1e-3
    seed: int = 7
    train_fraction: float = 0.9
    attn_dim: int | None = None

    def __post_init__(self):
        for name in ("batch_size", "epochs", "hidden", "embedding_dim", "max_seq_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be nonnegative")

    @classmethod
    def desk_scale(cls, **overrides) -> "TrainConfig":
        """Defaults sized so the full train/eval cycle runs in seconds."""
        return cls(**overrides)

    @classmethod
    def full_scale(cls, **overrides) -> "TrainConfig":
        """Sized for the full duplicate-question dataset and real 300-d vectors."""
        base = cls(
            batch_size=1024, epochs=9, hidden=100, embedding_dim=300,
            max_seq_length=10, learning_rate=1e-3, seed=7, train_fraction=0.9,
        )
        return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class LabeledPair:
    q1: str
    q2: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class EvalReport:
    accuracy: float
    threshold: float
    n_correct: int
    n_total: int
    mean_similarity_duplicate: float | None
    mean_similarity_distinct: float | None


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the epoch/batch it happened in."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


def split(
    pairs: list[LabeledPair], train_fraction: float, seed: int
) -> tuple[list[LabeledPair], list[LabeledPair]]:
    """Seeded shuffle, then the first ceil(fraction*N) pairs become train."""
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(len(pairs))
    cut = math.ceil(train_fraction * len(pairs))
    train = [pairs[i] for i in order[:cut]]
    test = [pairs[i] for i in order[cut:]]
    return train, test


def _embed_pairs(table: EmbeddingTable, pairs: list[LabeledPair], max_len: int):
    """Pre-embed every pair once; embeddings are frozen during training."""
    n = len(pairs)
    x1 = np.zeros((n, max_len, table.dim))
    x2 = np.zeros((n, max_len, table.dim))
    m1 = np.zeros((n, max_len), dtype=bool)
    m2 = np.zeros((n, max_len), dtype=bool)
    y = np.zeros(n)
    for i, pair in enumerate(pairs):
        for text, x, m, side in ((pair.q1, x1, m1, "q1"), (pair.q2, x2, m2, "q2")):
            seq = tokenize(text)
            if not seq.tokens:
                raise ValueError(f"pair {i}: {side} tokenizes to nothing")
            x[i], m[i] = embed_sequence(table, seq, max_len)
        y[i] = pair.label
    return x1, m1, x2, m2, y


def batch_loss(params: EncoderParams, x1, m1, x2, m2, y) -> float:
    """Mean squared error of similarity vs label over one batch."""
    pooled_a, _ = encode_batch(params, x1, m1)
    pooled_b, _ = encode_batch(params, x2, m2)
    sim = np.exp(-np.abs(pooled_a - pooled_b).sum(axis=1))
    return float(np.mean((sim - y) ** 2))


def batch_loss_and_grads(params: EncoderParams, x1, m1, x2, m2, y):
    """Loss plus its gradient as one flat vector matching flatten_params.

    Also returns the per-pair squared errors so callers can assemble
    shuffle-independent epoch losses.
    """
    pooled_a, cache_a = encode_batch(params, x1, m1)
    pooled_b, cache_b = encode_batch(params, x2, m2)
    diff = pooled_a - pooled_b
    sim = np.exp(-np.abs(diff).sum(axis=1))
    err = sim - y
    sq_err = err**2
    loss = float(np.mean(sq_err))
    # d loss/d sim = 2*err/B; d sim/d distance = -sim; d distance/d pooled_a = sign
    dsim = 2.0 * err / err.shape[0]
    ddist = -sim * dsim
    d_pooled_a = ddist[:, None] * np.sign(diff)
    grads_a = encode_batch_backward(params, cache_a, d_pooled_a)
    grads_b = encode_batch_backward(params, cache_b, -d_pooled_a)
    return loss, flatten_params(grads_a) + flatten_params(grads_b), sq_err


def train(
    config: TrainConfig, table: EmbeddingTable, pairs: list[LabeledPair]
) -> tuple[EncoderParams, list[float]]:
    """Train a fresh encoder; returns it with the per-epoch loss history.

    The reported epoch loss is the mean squared error over every pair at
    the parameter values each batch saw (running loss, standard practice).
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if table.dim != config.embedding_dim:
        raise ValueError(
            f"embedding table dim {table.dim} does not match config embedding_dim {config.embedding_dim}"
        )
    x1, m1, x2, m2, y = _embed_pairs(table, pairs, config.max_seq_length)
    params = init_params(
        hidden=config.hidden, embedding_dim=config.embedding_dim,
        attn_dim=config.attn_dim, seed=config.seed,
    )
    flat = flatten_params(params)
    attn_dim = params.attn_dim
    m_moment = np.zeros_like(flat)
    v_moment = np.zeros_like(flat)
    step = 0
    rng = np.random.default_rng(config.seed)
    n = len(pairs)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_sq_err = np.zeros(n)
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            current = unflatten_params(
                flat, config.hidden, config.embedding_dim, attn_dim, config.seed
            )
            loss, grad, sq_err = batch_loss_and_grads(
                current, x1[idx], m1[idx], x2[idx], m2[idx], y[idx]
            )
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch=epoch, batch=batch_no)
            epoch_sq_err[idx] = sq_err
            step += 1
            m_moment = ADAM_BETA1 * m_moment + (1.0 - ADAM_BETA1) * grad
            v_moment = ADAM_BETA2 * v_moment + (1.0 - ADAM_BETA2) * grad * grad
            m_hat = m_moment / (1.0 - ADAM_BETA1**step)
            v_hat = v_moment / (1.0 - ADAM_BETA2**step)
            flat = flat - config.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        history.append(float(epoch_sq_err.mean()))
    final = unflatten_params(
        flat, config.hidden, config.embedding_dim, attn_dim, config.seed
    )
    return final, history


def evaluate(
    params: EncoderParams | None,
    table: EmbeddingTable | None,
    pairs: list[LabeledPair],
    threshold: float = 0.5,
    max_len: int = 10,
    scorer=None,
) -> EvalReport:
    """Accuracy of thresholded similarity against the labels.

    `scorer(q1, q2) -> similarity` replaces the model when given, which
    lets tests evaluate idealized scorers without any parameters.
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if scorer is None:
        if params is None or table is None:
            raise ValueError("params and table are required without a scorer")
        x1, m1, x2, m2, _ = _embed_pairs(table, pairs, max_len)
        pooled_a, _ = encode_batch(params, x1, m1)
        pooled_b, _ = encode_batch(params, x2, m2)
        sims = np.exp(-np.abs(pooled_a - pooled_b).sum(axis=1))
    else:
        sims = np.array([float(scorer(p.q1, p.q2)) for p in pairs])
    labels = np.array([p.label for p in pairs])
    predictions = (sims >= threshold).astype(int)
    n_correct = int((predictions == labels).sum())
    pos = sims[labels == 1]
    neg = sims[labels == 0]
    return EvalReport(
        accuracy=n_correct / len(pairs),
        threshold=threshold,
        n_correct=n_correct,
        n_total=len(pairs),
        mean_similarity_duplicate=float(pos.mean()) if pos.size else None,
        mean_similarity_distinct=float(neg.mean()) if neg.size else None,
    )


# ---------------------------------------------------------------------------
# Config file and loss history formats (CLI-facing)


def parse_config(text: str) -> TrainConfig:
    """Parse `key = value` lines into a TrainConfig.

    Blank lines and #-comments are skipped; unknown keys and unparsable
    values are rejected with their line number. Missing keys keep the
    desk-scale defaults.
    """
    field_types = {f.name: f.type for f in fields(TrainConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in field_types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in ("learning_rate", "train_fraction"):
                values[key] = float(value)
            elif key == "attn_dim":
                values[key] = None if value.lower() == "none" else int(value)
            else:
                values[key] = int(value)
        except ValueError:
            raise ValueError(f"line {lineno}: bad value {value!r} for {key}") from None
    return TrainConfig(**values)


def load_config(path) -> TrainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def write_loss_history(history: list[float], path) -> None:
    """CSV with a header and one `epoch,loss` row per epoch (1-based)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("epoch,loss\n")
        for i, loss in enumerate(history, start=1):
            fh.write(f"{i},{loss!r}\n")
