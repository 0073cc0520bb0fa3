"""Tokenization and word-vector lookup.

Vectors are frozen: the similarity model trains everything downstream of
the lookup but never updates the table itself. Out-of-vocabulary words get
a deterministic pseudo-random vector derived from the word text, so the
same unknown word always embeds identically across processes and runs.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

import numpy as np

# Letter/digit/apostrophe runs; underscore is excluded from \w on purpose.
_TOKEN_RE = re.compile(r"(?:[^\W_]|')+", re.UNICODE)

OOV_RANGE = 0.25


@dataclass
class TokenSequence:
    """Lowercased tokens of one sentence plus the text they came from."""

    tokens: list[str]
    source_text: str

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def tokenize(text: str) -> TokenSequence:
    """Lowercase and split into letter/digit/apostrophe runs.

    Anything else separates tokens and is dropped: "don't" stays one token,
    "cold?" loses the question mark, "high-blood" splits in two.
    """
    return TokenSequence(tokens=_TOKEN_RE.findall(text.lower()), source_text=text)


def _oov_vector(word: str, dim: int, oov_seed: int) -> np.ndarray:
    # Process-independent: Python's hash() is salted per process, so derive
    # the stream from a cryptographic digest of the word instead.
    digest = hashlib.sha256(f"{oov_seed}:{word}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.uniform(-OOV_RANGE, OOV_RANGE, size=dim)


@dataclass
class EmbeddingTable:
    """Word -> vector map with deterministic out-of-vocabulary fallback."""

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    oov_seed: int = 1

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("embedding dimension must be positive")
        for word, vec in self.vectors.items():
            v = np.asarray(vec, dtype=np.float64)
            if v.shape != (self.dim,):
                raise ValueError(
                    f"vector for {word!r} has shape {v.shape}, expected ({self.dim},)"
                )
            self.vectors[word] = v

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def lookup(self, word: str) -> np.ndarray:
        """Vector for a word; OOV words get a cached deterministic vector."""
        vec = self.vectors.get(word)
        if vec is None:
            vec = _oov_vector(word, self.dim, self.oov_seed)
            self.vectors[word] = vec
        return vec

    def embed(self, text: str, max_len: int) -> tuple[np.ndarray, np.ndarray]:
        """Convenience: tokenize then embed_sequence."""
        return embed_sequence(self, tokenize(text), max_len)


def embed_sequence(
    table: EmbeddingTable, seq: TokenSequence, max_len: int
) -> tuple[np.ndarray, np.ndarray]:
    """Embed a token sequence as a fixed-size (max_len, dim) matrix.

    Keeps the FIRST max_len tokens (question words and entities usually
    appear early), right-pads with zero vectors, and returns a boolean mask
    that is True exactly at real-token positions.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    kept = seq.tokens[:max_len]
    vectors = np.zeros((max_len, table.dim), dtype=np.float64)
    mask = np.zeros(max_len, dtype=bool)
    for i, tok in enumerate(kept):
        vectors[i] = table.lookup(tok)
        mask[i] = True
    return vectors, mask


def load_vectors(path, dim: int | None = None) -> EmbeddingTable:
    """Read a plain-text vector file: one `word v1 v2 ... v_dim` per line.

    An optional first line `count dim` (two integers) is accepted and
    checked against the declared dim. Dimension is inferred from the first
    data line when not given. Duplicate words keep their first occurrence.
    Inconsistent lines raise ValueError with the offending line number.
    """
    table_dim = dim
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split()
            if lineno == 1 and len(parts) == 2:
                try:
                    _count, header_dim = int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    if table_dim is not None and header_dim != table_dim:
                        raise ValueError(
                            f"line 1: header dimension {header_dim} does not match expected {table_dim}"
                        )
                    table_dim = header_dim
                    continue
            word, *comps = parts
            if len(comps) < 1:
                raise ValueError(f"line {lineno}: no vector components for {word!r}")
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad vector component ({exc})") from None
            if table_dim is None:
                table_dim = vec.shape[0]
            elif vec.shape[0] != table_dim:
                raise ValueError(
                    f"line {lineno}: vector has {vec.shape[0]} components, expected {table_dim}"
                )
            if word not in vectors:
                vectors[word] = vec
    if table_dim is None:
        raise ValueError("vector file contains no data lines")
    return EmbeddingTable(dim=int(table_dim), vectors=vectors)


def save_vectors(table: EmbeddingTable, path, header: bool = True) -> None:
    """Write the table in the same plain-text format load_vectors reads."""
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table.vectors)} {table.dim}\n")
        for word in sorted(table.vectors):
            comps = " ".join(repr(float(c)) for c in table.vectors[word])
            fh.write(f"{word} {comps}\n")


def random_table(words, dim: int, seed: int) -> EmbeddingTable:
    """Embedding table with seeded uniform vectors for a fixed vocabulary."""
    rng = np.random.default_rng(seed)
    vectors = {w: rng.uniform(-OOV_RANGE, OOV_RANGE, size=dim) for w in sorted(set(words))}
    return EmbeddingTable(dim=dim, vectors=vectors)
