"""
Trained neural classifier: parameters bound to their vocabulary and config.
"""
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from sexism_detector.embeddings.vocabulary import Vocabulary, encode, encode_batch
from sexism_detector.nn import model
from sexism_detector.nn.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from sexism_detector.nn.params import ModelParams
from sexism_detector.schema.config_schema import ExperimentConfig, ModelFamily
from sexism_detector.utils.exceptions import CheckpointError, ModelError


class NeuralClassifier:
    """V2 / V3 / V4 model ready for prediction on normalized token lists."""

    kind = "neural"

    def __init__(
        self,
        params: ModelParams,
        vocab: Vocabulary,
        config: ExperimentConfig,
        slang_map: Optional[Mapping[str, str]] = None,
    ):
        if params.embedding.shape[0] != len(vocab):
            raise ModelError(f"Embedding has {params.embedding.shape[0]} rows for a vocabulary of {len(vocab)}")
        self.params = params
        self.vocab = vocab
        self.config = config
        self.slang_map: Dict[str, str] = dict(slang_map or {})

    @property
    def version(self) -> str:
        return self.config.version

    def predict_proba(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        """Probabilities of the sexist class; every token list must be non-empty."""
        ids, lengths = encode_batch(token_lists, self.vocab, self.config.max_len)
        probabilities, _ = model.predict(self.params, ids, lengths)
        return probabilities

    def predict(self, token_lists: Sequence[Sequence[str]]) -> Tuple[np.ndarray, np.ndarray]:
        ids, lengths = encode_batch(token_lists, self.vocab, self.config.max_len)
        return model.predict(self.params, ids, lengths)

    def attention_weights(self, tokens: Sequence[str]) -> List[Tuple[str, float]]:
        """
        (token, weight) pairs over the encoded part of one statement.

        Raises:
            ModelError: For models without attention or empty statements
        """
        if self.params.family != ModelFamily.BILSTM_ATTENTION:
            raise ModelError(f"{self.version} has no attention layer")
        ids, length = encode(tokens, self.vocab, self.config.max_len)
        weights = model.attention_weights(self.params, ids, length)
        return [(token, float(w)) for token, w in zip(tokens[:length], weights)]

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            kind=self.kind,
            config=self.config.model_dump(mode="json"),
            vocabulary=self.vocab,
            tensors=self.params.named_tensors(),
            slang_map=self.slang_map,
        )

    def save(self, path) -> None:
        save_checkpoint(self.to_checkpoint(), path)

    @classmethod
    def from_checkpoint(cls, checkpoint: Union[Checkpoint, str]) -> "NeuralClassifier":
        if not isinstance(checkpoint, Checkpoint):
            checkpoint = load_checkpoint(checkpoint, expected_kind=cls.kind)
        try:
            config = ExperimentConfig(**checkpoint.config)
            params = ModelParams.from_named_tensors(
                config.family,
                checkpoint.tensors,
                dropout_rate=config.dropout_rate,
                trainable_embeddings=config.trainable_embeddings,
            )
        except (ValueError, ModelError) as e:
            raise CheckpointError(f"Checkpoint does not describe a valid neural model: {e}") from e
        return cls(params=params, vocab=checkpoint.vocabulary, config=config, slang_map=checkpoint.slang_map)
