"""
Tests for initial embedding matrices and the config-driven loader.
"""
import numpy as np
import pytest

from sexism_detector.embeddings.loader import EmbeddingLoader
from sexism_detector.embeddings.matrix import EmbeddingMatrix, build_matrix, coverage
from sexism_detector.embeddings.table import EmbeddingTable
from sexism_detector.embeddings.vocabulary import OOV_INDEX, PAD_INDEX, build_vocab
from sexism_detector.schema.config_schema import EmbeddingMode, ExperimentConfig
from sexism_detector.utils.exceptions import DimensionMismatchError, EmbeddingError

VOCAB = build_vocab([("known", "missing", "known")])
TABLE = EmbeddingTable(dim=3, entries={"known": [0.5, -1.5, 2.0], "other": [1.0, 1.0, 1.0]})


def test_random_mode_is_deterministic():
    first = build_matrix(VOCAB, None, 3, EmbeddingMode.RANDOM, seed=4)
    second = build_matrix(VOCAB, None, 3, "random", seed=4)
    np.testing.assert_array_equal(first.rows, second.rows)
    assert first.coverage is None


def test_random_rows_in_range_and_padding_zero():
    matrix = build_matrix(VOCAB, None, 8, EmbeddingMode.RANDOM, seed=1)
    assert np.all(matrix.rows[PAD_INDEX] == 0.0)
    assert np.all(np.abs(matrix.rows[1:]) <= 0.25)
    assert np.any(matrix.rows[OOV_INDEX] != 0.0)


def test_glove_row_copied_exactly():
    matrix = build_matrix(VOCAB, TABLE, 3, EmbeddingMode.GLOVE, seed=0)
    assert np.array_equal(matrix.rows[VOCAB.lookup("known")], TABLE["known"])
    assert matrix.coverage == 0.5


def test_glove_missing_token_falls_back_to_random():
    a = build_matrix(VOCAB, TABLE, 3, EmbeddingMode.GLOVE, seed=0)
    b = build_matrix(VOCAB, TABLE, 3, EmbeddingMode.GLOVE, seed=1)
    row = VOCAB.lookup("missing")
    assert np.all(np.abs(a.rows[row]) <= 0.25)
    assert not np.array_equal(a.rows[row], b.rows[row])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        build_matrix(VOCAB, TABLE, 4, EmbeddingMode.GLOVE, seed=0)


def test_pretrained_mode_needs_table():
    with pytest.raises(EmbeddingError):
        build_matrix(VOCAB, None, 3, EmbeddingMode.GN_GLOVE, seed=0)


def test_matrix_rejects_nonzero_padding():
    rows = np.ones((3, 2))
    with pytest.raises(EmbeddingError, match="Padding row"):
        EmbeddingMatrix(rows=rows, mode=EmbeddingMode.RANDOM)


def test_coverage_statistic_in_unit_interval():
    value = coverage(VOCAB, TABLE)
    assert 0.0 <= value <= 1.0
    assert value == 0.5


class TestEmbeddingLoader:
    def test_random_mode_loads_no_table(self):
        config = ExperimentConfig(version="V3a", embedding_dim=3)
        assert EmbeddingLoader().load_table(config, VOCAB) is None

    def test_missing_file_names_path(self, tmp_path):
        config = ExperimentConfig(version="V3b", embedding_dim=3, glove_path="absent_vectors.txt")
        with pytest.raises(EmbeddingError, match="absent_vectors.txt"):
            EmbeddingLoader(search_path=str(tmp_path)).build_matrix(config, VOCAB, seed=0)

    def test_builds_from_search_path(self, toy_embedding_file, toy_token_lists):
        vocab = build_vocab(toy_token_lists)
        config = ExperimentConfig(version="V3b", embedding_dim=4, glove_path=toy_embedding_file.name)
        loader = EmbeddingLoader(search_path=str(toy_embedding_file.parent))
        matrix = loader.build_matrix(config, vocab, seed=0, trainable=False)
        assert matrix.rows.shape == (len(vocab), 4)
        assert 0.0 < matrix.coverage < 1.0
        assert matrix.trainable is False
