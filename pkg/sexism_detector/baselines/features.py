"""
Mean-embedding statement features.
"""
from typing import Sequence

import numpy as np

from sexism_detector.embeddings.vocabulary import OOV_INDEX, PAD_INDEX, Vocabulary


def _rows(matrix) -> np.ndarray:
    return np.asarray(getattr(matrix, "rows", matrix), dtype=np.float64)


def mean_embedding(
    tokens: Sequence[str],
    vocab: Vocabulary,
    matrix,
    include_oov: bool = True,
) -> np.ndarray:
    """
    Arithmetic mean of the embedding rows of a statement's tokens.

    OOV tokens contribute the OOV row unless `include_oov` is False. An empty
    statement (or one with only skipped tokens) maps to the zero vector.

    Args:
        tokens: Normalized tokens
        vocab: Vocabulary
        matrix: EmbeddingMatrix or (vocab, dim) array
        include_oov: Average the OOV row in for unknown tokens

    Returns:
        Feature vector of length dim
    """
    rows = _rows(matrix)
    indices = [vocab.lookup(token) for token in tokens]
    indices = [i for i in indices if i != PAD_INDEX and (include_oov or i != OOV_INDEX)]
    if not indices:
        return np.zeros(rows.shape[1])
    return rows[indices].mean(axis=0)


def mean_embedding_features(
    token_lists: Sequence[Sequence[str]],
    vocab: Vocabulary,
    matrix,
    include_oov: bool = True,
) -> np.ndarray:
    """(statements, dim) feature matrix."""
    rows = _rows(matrix)
    features = np.zeros((len(token_lists), rows.shape[1]))
    for idx, tokens in enumerate(token_lists):
        features[idx] = mean_embedding(tokens, vocab, rows, include_oov)
    return features
