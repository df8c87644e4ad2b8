"""
Centralized exception definitions for the detection system.
"""
from typing import Any, Optional


class DetectorError(Exception):
    """Base exception for all detector errors."""
    pass


class ConfigurationError(DetectorError):
    """Invalid experiment configuration or config file."""
    pass


class CorpusError(DetectorError):
    """Error while loading, normalizing or splitting the statement corpus."""
    pass


class EmptyDatasetError(CorpusError):
    """The dataset has no usable rows."""
    pass


class EmbeddingError(DetectorError):
    """Error while reading embedding files or building embedding matrices."""
    pass


class DimensionMismatchError(EmbeddingError):
    """Embedding vectors disagree on their dimension."""
    pass


class ModelError(DetectorError):
    """Shape or trace mismatch inside the neural network code."""
    pass


class CheckpointError(DetectorError):
    """Error while writing or reading a model checkpoint."""
    pass


class MetricsError(DetectorError):
    """Invalid inputs to a metric computation."""
    pass


class TrainingAbortedError(DetectorError):
    """Training produced a non-finite loss or diverging parameters and was stopped."""

    def __init__(self, message: str, epoch: int, batch: int, config: Optional[Any] = None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.config = config

    def with_config(self, config: Any) -> "TrainingAbortedError":
        self.config = config
        return self

    def __str__(self) -> str:
        base = f"{self.args[0]} (epoch {self.epoch}, batch {self.batch})"
        if self.config is not None:
            version = getattr(self.config, "version", None)
            base += f" [config {version or self.config}]"
        return base
