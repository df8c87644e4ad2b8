"""
Config-driven embedding loading: resolves the file of a ladder row and
builds its initial matrix.
"""
import logging
from typing import Optional

from sexism_detector.embeddings.matrix import EmbeddingMatrix, build_matrix
from sexism_detector.embeddings.table import EmbeddingTable, parse_embedding_file, resolve_embedding_path
from sexism_detector.embeddings.vocabulary import Vocabulary
from sexism_detector.schema.config_schema import EmbeddingMode, ExperimentConfig

logger = logging.getLogger(__name__)


class EmbeddingLoader:
    """
    Loads the pretrained table a config asks for, restricted to the
    vocabulary being trained.
    """

    def __init__(self, search_path: Optional[str] = None):
        """
        Args:
            search_path: os.pathsep-separated directories; settings.EMBEDDINGS_PATH when omitted
        """
        self.search_path = search_path

    def load_table(self, config: ExperimentConfig, vocab: Vocabulary) -> Optional[EmbeddingTable]:
        """
        Returns:
            The restricted table, or None in random mode

        Raises:
            EmbeddingError: If the configured file cannot be found or parsed
        """
        if config.embedding == EmbeddingMode.RANDOM:
            return None
        path = resolve_embedding_path(config.embedding_path, self.search_path)
        logger.info(f"[{config.version}] loading {config.embedding.value} vectors from {path}")
        return parse_embedding_file(path, restrict_to=vocab.corpus_tokens)

    def build_matrix(
        self,
        config: ExperimentConfig,
        vocab: Vocabulary,
        seed: int,
        trainable: bool = True,
    ) -> EmbeddingMatrix:
        table = self.load_table(config, vocab)
        return build_matrix(vocab, table, config.embedding_dim, config.embedding, seed, trainable=trainable)
