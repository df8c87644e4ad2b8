"""
Initial embedding matrices for the random / GloVe / GN-GloVe modes.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from sexism_detector.embeddings.table import EmbeddingTable
from sexism_detector.embeddings.vocabulary import PAD_INDEX, Vocabulary
from sexism_detector.schema.config_schema import EmbeddingMode
from sexism_detector.utils.exceptions import DimensionMismatchError, EmbeddingError

logger = logging.getLogger(__name__)

RANDOM_INIT_SCALE = 0.25


@dataclass(frozen=True)
class EmbeddingMatrix:
    """
    |vocabulary| x dim matrix whose row 0 (padding) is the zero vector.

    `coverage` is the fraction of corpus tokens copied from a pretrained
    table (None in random mode).
    """

    rows: np.ndarray
    mode: EmbeddingMode
    trainable: bool = True
    coverage: Optional[float] = None

    def __post_init__(self):
        if self.rows.ndim != 2:
            raise EmbeddingError(f"Embedding matrix must be 2-D, got shape {self.rows.shape}")
        if not np.all(np.isfinite(self.rows)):
            raise EmbeddingError("Embedding matrix has non-finite entries")
        if np.any(self.rows[PAD_INDEX] != 0.0):
            raise EmbeddingError("Padding row of the embedding matrix must be zero")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]


def coverage(vocab: Vocabulary, table: EmbeddingTable) -> float:
    """Fraction of the vocabulary's corpus tokens found in the table."""
    return table.coverage(vocab.corpus_tokens)


def build_matrix(
    vocab: Vocabulary,
    table: Optional[EmbeddingTable],
    dim: int,
    mode: Union[EmbeddingMode, str],
    seed: int,
    trainable: bool = True,
) -> EmbeddingMatrix:
    """
    Build the initial embedding matrix for a vocabulary.

    Every row is first drawn uniformly from [-0.25, 0.25] with a generator
    seeded by `seed`; in the pretrained modes, rows of tokens present in
    the table are then overwritten with their table vectors. The padding
    row is zeroed last. Reserved rows are never looked up in the table.

    Args:
        vocab: Vocabulary
        table: Pretrained vectors; required unless mode is random
        dim: Embedding dimension
        mode: random | glove | gn-glove
        seed: Seed of the random rows
        trainable: Whether training may update the rows

    Returns:
        EmbeddingMatrix

    Raises:
        EmbeddingError: Pretrained mode without a table
        DimensionMismatchError: table.dim differs from dim
    """
    mode = EmbeddingMode(mode)
    if dim < 1:
        raise EmbeddingError(f"Embedding dimension must be positive, got {dim}")

    rng = np.random.default_rng(seed)
    rows = rng.uniform(-RANDOM_INIT_SCALE, RANDOM_INIT_SCALE, size=(len(vocab), dim))

    found_fraction = None
    if mode != EmbeddingMode.RANDOM:
        if table is None:
            raise EmbeddingError(f"Embedding mode {mode.value} needs an embedding table")
        if table.dim != dim:
            raise DimensionMismatchError(f"Requested embedding dim {dim}, but the table has dim {table.dim}")
        found = 0
        for idx, token in enumerate(vocab.corpus_tokens, start=2):
            vector = table.get(token)
            if vector is not None:
                rows[idx] = vector
                found += 1
        found_fraction = found / len(vocab.corpus_tokens) if vocab.corpus_tokens else 0.0
        logger.info(
            f"Embedding coverage ({mode.value}): {found}/{len(vocab.corpus_tokens)} tokens ({found_fraction:.2%})"
        )

    rows[PAD_INDEX] = 0.0
    return EmbeddingMatrix(rows=rows, mode=mode, trainable=trainable, coverage=found_fraction)
