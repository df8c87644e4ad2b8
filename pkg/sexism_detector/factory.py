"""
Factory module for creating trainers and loading trained classifiers.
"""
from typing import Mapping, Optional, Union

from sexism_detector.baselines.classifier import BaselineClassifier, BaselineTrainer
from sexism_detector.embeddings.loader import EmbeddingLoader
from sexism_detector.nn.checkpoint import load_checkpoint
from sexism_detector.nn.classifier import NeuralClassifier
from sexism_detector.nn.trainer import NeuralTrainer
from sexism_detector.schema.config_schema import ExperimentConfig

Trainer = Union[NeuralTrainer, BaselineTrainer]
Classifier = Union[NeuralClassifier, BaselineClassifier]


def create_trainer(
    config: ExperimentConfig,
    search_path: Optional[str] = None,
    slang_map: Optional[Mapping[str, str]] = None,
) -> Trainer:
    """
    Create the trainer for one ladder row with all necessary dependencies.

    Args:
        config: Experiment config; its family picks the trainer
        search_path: Directories searched for embedding files
        slang_map: Slang table stored with the trained model

    Returns:
        Configured NeuralTrainer or BaselineTrainer
    """
    embedding_loader = EmbeddingLoader(search_path)

    if config.family.is_neural:
        return NeuralTrainer(config, embedding_loader, slang_map=slang_map)
    return BaselineTrainer(config, embedding_loader, slang_map=slang_map)


def load_classifier(path) -> Classifier:
    """
    Load a checkpoint of any kind into its classifier.

    Raises:
        CheckpointError: If the file is missing, malformed or inconsistent
    """
    checkpoint = load_checkpoint(path)
    if checkpoint.kind == NeuralClassifier.kind:
        return NeuralClassifier.from_checkpoint(checkpoint)
    return BaselineClassifier.from_checkpoint(checkpoint)
