"""
Mean-embedding baselines (V1a logistic regression, V1b GBDT) behind the same
train / predict / checkpoint surface as the neural models.
"""
import logging
import time
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from sexism_detector.baselines.features import mean_embedding_features
from sexism_detector.baselines.gbdt import GbdtModel, gbdt_fit
from sexism_detector.baselines.logreg import LogRegModel, logreg_fit
from sexism_detector.embeddings.loader import EmbeddingLoader
from sexism_detector.embeddings.vocabulary import Vocabulary, build_vocab
from sexism_detector.nn.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from sexism_detector.nn.model import DECISION_THRESHOLD
from sexism_detector.schema.config_schema import ExperimentConfig, ModelFamily
from sexism_detector.schema.report_schema import TrainingSummary
from sexism_detector.utils.exceptions import CheckpointError, ModelError
from sexism_detector.utils.seeding import derive_seeds

logger = logging.getLogger(__name__)

BaselineModel = Union[LogRegModel, GbdtModel]


class BaselineClassifier:
    """
    A fitted V1 model with the fixed embedding rows its features come from.
    """

    def __init__(
        self,
        model: BaselineModel,
        vocab: Vocabulary,
        embedding_rows: np.ndarray,
        config: ExperimentConfig,
        slang_map: Optional[Mapping[str, str]] = None,
    ):
        if embedding_rows.shape[0] != len(vocab):
            raise ModelError(f"Embedding has {embedding_rows.shape[0]} rows for a vocabulary of {len(vocab)}")
        self.model = model
        self.vocab = vocab
        self.embedding_rows = embedding_rows
        self.config = config
        self.slang_map: Dict[str, str] = dict(slang_map or {})

    @property
    def kind(self) -> str:
        return "gbdt" if isinstance(self.model, GbdtModel) else "logreg"

    @property
    def version(self) -> str:
        return self.config.version

    def features(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        return mean_embedding_features(
            token_lists, self.vocab, self.embedding_rows, include_oov=self.config.mean_include_oov
        )

    def predict_proba(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        return self.model.predict_proba(self.features(token_lists))

    def predict(self, token_lists: Sequence[Sequence[str]]) -> Tuple[np.ndarray, np.ndarray]:
        probabilities = self.predict_proba(token_lists)
        return probabilities, (probabilities >= DECISION_THRESHOLD).astype(np.int64)

    def to_checkpoint(self) -> Checkpoint:
        tensors = {"embedding": self.embedding_rows}
        extra = {}
        if isinstance(self.model, GbdtModel):
            extra["gbdt"] = self.model.to_record()
        else:
            tensors["logreg.weights"] = self.model.weights
            tensors["logreg.bias"] = np.array([self.model.bias])
        return Checkpoint(
            kind=self.kind,
            config=self.config.model_dump(mode="json"),
            vocabulary=self.vocab,
            tensors=tensors,
            slang_map=self.slang_map,
            extra=extra,
        )

    def save(self, path) -> None:
        save_checkpoint(self.to_checkpoint(), path)

    @classmethod
    def from_checkpoint(cls, checkpoint: Union[Checkpoint, str]) -> "BaselineClassifier":
        if not isinstance(checkpoint, Checkpoint):
            checkpoint = load_checkpoint(checkpoint)
        if checkpoint.kind not in ("logreg", "gbdt"):
            raise CheckpointError(f"Checkpoint kind {checkpoint.kind!r} is not a baseline model")
        try:
            config = ExperimentConfig(**checkpoint.config)
            rows = checkpoint.tensors["embedding"]
            if checkpoint.kind == "gbdt":
                model = GbdtModel.from_record(checkpoint.extra["gbdt"])
            else:
                model = LogRegModel(
                    weights=checkpoint.tensors["logreg.weights"],
                    bias=float(checkpoint.tensors["logreg.bias"][0]),
                )
            return cls(model=model, vocab=checkpoint.vocabulary, embedding_rows=rows,
                       config=config, slang_map=checkpoint.slang_map)
        except (KeyError, IndexError, ValueError, ModelError) as e:
            raise CheckpointError(f"Checkpoint does not describe a valid {checkpoint.kind} model: {e}") from e


class BaselineTrainer:
    """
    Trains one V1 ladder row. Embeddings stay fixed: the features are the
    mean of the initial embedding rows.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        embedding_loader: EmbeddingLoader,
        slang_map: Optional[Mapping[str, str]] = None,
    ):
        if config.family not in (ModelFamily.LOGREG, ModelFamily.GBDT):
            raise ModelError(f"{config.version} is not a baseline model")
        self.config = config
        self.embedding_loader = embedding_loader
        self.slang_map = dict(slang_map or {})

    def train(
        self,
        token_lists: Sequence[Sequence[str]],
        labels: Sequence[int],
        seed: int,
    ) -> Tuple[BaselineClassifier, TrainingSummary]:
        config = self.config
        started = time.perf_counter()
        streams = derive_seeds(seed)

        vocab = build_vocab(token_lists, min_freq=config.min_freq)
        matrix = self.embedding_loader.build_matrix(config, vocab, streams.embedding, trainable=False)
        features = mean_embedding_features(token_lists, vocab, matrix, include_oov=config.mean_include_oov)
        y = np.asarray(labels, dtype=np.float64)

        if config.family == ModelFamily.GBDT:
            model = gbdt_fit(
                features,
                y,
                n_trees=config.gbdt_trees,
                max_depth=config.gbdt_max_depth,
                learning_rate=config.gbdt_learning_rate,
                seed=streams.training,
            )
            epochs = config.gbdt_trees
        else:
            model = logreg_fit(
                features,
                y,
                l2=config.logreg_l2,
                lr=config.logreg_learning_rate,
                epochs=config.logreg_epochs,
                seed=streams.training,
            )
            epochs = config.logreg_epochs

        classifier = BaselineClassifier(
            model=model, vocab=vocab, embedding_rows=matrix.rows, config=config, slang_map=self.slang_map
        )
        summary = TrainingSummary(
            epochs=epochs,
            loss_history=model.loss_history,
            vocab_size=len(vocab),
            embedding_coverage=matrix.coverage,
            wallclock_s=time.perf_counter() - started,
        )
        return classifier, summary
