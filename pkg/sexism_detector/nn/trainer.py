"""
Mini-batch training loop for the neural ladder models.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from sexism_detector.embeddings.loader import EmbeddingLoader
from sexism_detector.embeddings.vocabulary import Vocabulary, build_vocab, encode_batch
from sexism_detector.nn.classifier import NeuralClassifier
from sexism_detector.nn.layers import bce_loss
from sexism_detector.nn.model import backward, forward
from sexism_detector.nn.optim import AdamState, adam_step
from sexism_detector.nn.params import ModelParams, init_params
from sexism_detector.schema.config_schema import ExperimentConfig
from sexism_detector.schema.report_schema import TrainingSummary
from sexism_detector.utils.exceptions import ModelError, TrainingAbortedError
from sexism_detector.utils.seeding import derive_seeds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncodedDataset:
    """Padded token ids, valid lengths and float labels of a training set."""

    ids: np.ndarray
    lengths: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        n = self.ids.shape[0]
        if self.ids.ndim != 2 or self.lengths.shape != (n,) or self.labels.shape != (n,):
            raise ModelError(
                f"Inconsistent dataset shapes: ids {self.ids.shape}, lengths {self.lengths.shape}, labels {self.labels.shape}"
            )

    def __len__(self) -> int:
        return self.ids.shape[0]

    @classmethod
    def from_token_lists(
        cls,
        token_lists: Sequence[Sequence[str]],
        labels: Sequence[int],
        vocab: Vocabulary,
        max_len: int,
    ) -> "EncodedDataset":
        ids, lengths = encode_batch(token_lists, vocab, max_len)
        return cls(ids=ids, lengths=lengths, labels=np.asarray(labels, dtype=np.float64))


@dataclass
class FitResult:
    params: ModelParams
    loss_history: List[float] = field(default_factory=list)
    epochs: int = 0
    optimizer_state: AdamState = field(default_factory=AdamState)


def check_divergence(tensors: Mapping[str, np.ndarray], limit: float, epoch: int, batch: int) -> None:
    """
    Raise TrainingAbortedError when an updated tensor is non-finite or has
    an entry larger than `limit` in magnitude.
    """
    for name, value in tensors.items():
        if not np.all(np.isfinite(value)):
            logger.error(f"Parameter {name} became non-finite at epoch {epoch}, batch {batch}")
            raise TrainingAbortedError(f"non-finite parameter {name}", epoch, batch)
        peak = float(np.max(np.abs(value))) if value.size else 0.0
        if peak > limit:
            logger.error(f"Parameter {name} diverged at epoch {epoch}, batch {batch}: max |value| {peak:.3g}")
            raise TrainingAbortedError(
                f"training diverged: parameter {name} reached magnitude {peak:.3g} (limit {limit:g})",
                epoch,
                batch,
            )


def fit(
    train: EncodedDataset,
    config: ExperimentConfig,
    initial_params: ModelParams,
    seed: int,
) -> FitResult:
    """
    Train with Adam on shuffled mini-batches; dropout is active only here.

    The shuffle order and the dropout masks come from two generators
    spawned from `seed`, so (seed, config, data) fix the loss history.

    Args:
        train: Encoded training set
        config: Batch size, epochs and optimizer settings
        initial_params: Starting parameters (not modified)
        seed: Training seed

    Returns:
        FitResult with the per-epoch mean training loss

    Raises:
        ModelError: Empty training set
        TrainingAbortedError: Non-finite loss or gradient, or diverging parameters
    """
    if len(train) == 0:
        raise ModelError("Cannot fit on an empty training set")

    shuffle_seq, dropout_seq = np.random.SeedSequence(seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)

    params = initial_params.copy()
    trainable = params.trainable_names()
    state = AdamState()
    history: List[float] = []
    n = len(train)

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for batch_no, start in enumerate(range(0, n, config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            lengths = train.lengths[idx]
            ids = train.ids[idx, : int(lengths.max())]
            labels = train.labels[idx]

            trace = forward(params, ids, lengths, training=True, rng=dropout_rng)
            loss = float(np.mean(bce_loss(trace.probabilities, labels)))
            if not np.isfinite(loss):
                logger.error(f"Non-finite loss {loss} at epoch {epoch}, batch {batch_no}")
                raise TrainingAbortedError(f"non-finite training loss {loss}", epoch, batch_no)

            grads = backward(trace, labels, params)
            if not all(np.all(np.isfinite(grads[name])) for name in trainable):
                logger.error(f"Non-finite gradient at epoch {epoch}, batch {batch_no}")
                raise TrainingAbortedError("non-finite gradient", epoch, batch_no)

            tensors = params.named_tensors()
            updated, state = adam_step(
                {name: tensors[name] for name in trainable},
                grads,
                state,
                lr=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.adam_epsilon,
            )
            check_divergence(updated, config.divergence_limit, epoch, batch_no)
            params = params.with_tensors(updated)
            total += loss * len(idx)

        history.append(total / n)
        if epoch % config.log_every == 0 or epoch == config.epochs:
            logger.info(f"[{config.version}] epoch {epoch}/{config.epochs} mean loss {history[-1]:.6f}")

    return FitResult(params=params, loss_history=history, epochs=config.epochs, optimizer_state=state)


class NeuralTrainer:
    """
    Trains one neural ladder row: vocabulary, embedding matrix, parameter
    initialisation and the fit loop.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        embedding_loader: EmbeddingLoader,
        slang_map: Optional[Mapping[str, str]] = None,
    ):
        if not config.family.is_neural:
            raise ModelError(f"{config.version} is not a neural model")
        self.config = config
        self.embedding_loader = embedding_loader
        self.slang_map = dict(slang_map or {})

    def train(
        self,
        token_lists: Sequence[Sequence[str]],
        labels: Sequence[int],
        seed: int,
    ) -> Tuple[NeuralClassifier, TrainingSummary]:
        """Train on one training split; returns the classifier and its training summary."""
        config = self.config
        started = time.perf_counter()
        streams = derive_seeds(seed)

        vocab = build_vocab(token_lists, min_freq=config.min_freq)
        matrix = self.embedding_loader.build_matrix(
            config, vocab, streams.embedding, trainable=config.trainable_embeddings
        )
        initial = init_params(
            config.family,
            matrix.rows,
            hidden_size=config.hidden_size,
            attention_size=config.attention_size,
            dropout_rate=config.dropout_rate,
            seed=streams.init,
            trainable_embeddings=config.trainable_embeddings,
        )
        dataset = EncodedDataset.from_token_lists(token_lists, labels, vocab, config.max_len)

        try:
            result = fit(dataset, config, initial, streams.training)
        except TrainingAbortedError as e:
            raise e.with_config(config)

        classifier = NeuralClassifier(params=result.params, vocab=vocab, config=config, slang_map=self.slang_map)
        summary = TrainingSummary(
            epochs=result.epochs,
            loss_history=result.loss_history,
            vocab_size=len(vocab),
            embedding_coverage=matrix.coverage,
            wallclock_s=time.perf_counter() - started,
        )
        return classifier, summary
