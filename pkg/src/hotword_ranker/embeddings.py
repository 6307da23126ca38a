"""Learned phoneme embedding table.

Embeddings are trained jointly with the scorer; the table lives inside the
model's parameter set and this module only defines the container and the
lookup operation. Row 0 is the PAD row: always zero, never updated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownPhoneme
from .frontend import PhonemeSequence
from .vocab import PAD_ID, PhonemeVocab

DEFAULT_EMBEDDING_DIM = 32
INIT_SCALE = 0.1


@dataclass
class EmbeddingTable:
    weights: np.ndarray  # (vocab_size, dim); row 0 (PAD) all zeros

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.weights.shape[0]


def init_embedding_table(
    vocab_size: int,
    dim: int = DEFAULT_EMBEDDING_DIM,
    rng: np.random.Generator | None = None,
    dtype=np.float32,
) -> EmbeddingTable:
    rng = rng or np.random.default_rng(0)
    w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(vocab_size, dim)).astype(dtype)
    w[PAD_ID] = 0.0
    return EmbeddingTable(w)


def embed_sequence(
    seq: PhonemeSequence, table: EmbeddingTable, vocab: PhonemeVocab
) -> np.ndarray:
    """Row i is the table row of phoneme i; no normalization is applied."""
    ids = []
    for p in seq.phonemes:
        if p.symbol not in vocab.index:
            raise UnknownPhoneme(f"phoneme {p.symbol!r} not in vocabulary")
        ids.append(vocab.index[p.symbol])
    return table.weights[np.asarray(ids, dtype=np.intp)]


def embed_ids(ids, table: EmbeddingTable) -> np.ndarray:
    return table.weights[np.asarray(ids, dtype=np.intp)]
