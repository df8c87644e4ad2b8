"""
Experiment configuration models and the model ladder definition.
"""
import functools
import hashlib
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sexism_detector import settings
from sexism_detector.utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

LADDER_PATH = Path(__file__).parent.parent / "resources" / "ladder.yaml"

ModelVersion = Literal["V1a", "V1b", "V2", "V3a", "V3b", "V3c", "V4a", "V4b", "V4c"]


class EmbeddingMode(str, Enum):
    RANDOM = "random"
    GLOVE = "glove"
    GN_GLOVE = "gn-glove"


class ModelFamily(str, Enum):
    LOGREG = "logreg"
    GBDT = "gbdt"
    LSTM = "lstm"
    BILSTM = "bilstm"
    BILSTM_ATTENTION = "bilstm_attention"

    @property
    def is_neural(self) -> bool:
        return self in (ModelFamily.LSTM, ModelFamily.BILSTM, ModelFamily.BILSTM_ATTENTION)


class LadderEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    version: str
    description: str
    family: ModelFamily
    embedding: EmbeddingMode


@functools.lru_cache(maxsize=4)
def load_ladder(path: Optional[str] = None) -> Dict[str, LadderEntry]:
    """
    Load the model ladder from its YAML definition.

    Args:
        path: Optional alternative ladder file

    Returns:
        Ordered mapping of version id to ladder entry, in report order

    Raises:
        ValueError: If the file has no `versions` section
    """
    ladder_path = Path(path) if path else LADDER_PATH
    with open(ladder_path, encoding="utf-8") as f:
        config = yaml.safe_load(f) or {}

    versions = config.get("versions")
    if not versions:
        raise ValueError(f"No 'versions' section in ladder file {ladder_path}")

    return {name: LadderEntry(version=name, **meta) for name, meta in versions.items()}


class DatasetSchema(BaseModel):
    """Column names of an input dataset; the format follows the file suffix."""

    model_config = ConfigDict(frozen=True)

    text_column: str = settings.DEFAULT_TEXT_COLUMN
    label_column: str = settings.DEFAULT_LABEL_COLUMN
    source_column: Optional[str] = None

    @model_validator(mode="after")
    def columns_must_differ(self):
        if self.text_column == self.label_column:
            raise ValueError("text and label columns must differ")
        return self


class ExperimentConfig(BaseModel):
    """
    One row of the model ladder plus every hyperparameter needed to train it.

    The model is flat so it maps one-to-one onto a flat YAML config file.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    version: ModelVersion
    embedding: Optional[EmbeddingMode] = None
    glove_path: str = settings.DEFAULT_GLOVE_FILE
    gn_glove_path: str = settings.DEFAULT_GN_GLOVE_FILE

    # embeddings
    embedding_dim: int = Field(default=100, gt=0)
    trainable_embeddings: bool = True
    max_len: int = Field(default=48, ge=1)
    min_freq: int = Field(default=1, ge=1)

    # neural models
    hidden_size: int = Field(default=64, gt=0)
    attention_size: int = Field(default=64, gt=0)
    dropout_rate: float = Field(default=0.5, ge=0.0, lt=1.0)
    batch_size: int = Field(default=32, gt=0)
    epochs: int = Field(default=30, ge=0)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_epsilon: float = Field(default=1e-8, gt=0.0)
    log_every: int = Field(default=5, ge=1)
    # Training aborts once any parameter grows past this magnitude
    divergence_limit: float = Field(default=1e4, gt=0.0)

    # logistic regression baseline
    logreg_learning_rate: float = Field(default=0.1, gt=0.0)
    logreg_epochs: int = Field(default=500, ge=0)
    logreg_l2: float = Field(default=1e-4, ge=0.0)

    # gradient boosted trees baseline
    gbdt_trees: int = Field(default=200, ge=1)
    gbdt_max_depth: int = Field(default=3, ge=1)
    gbdt_learning_rate: float = Field(default=0.1, gt=0.0)

    mean_include_oov: bool = True
    split_ratio: float = Field(default=settings.DEFAULT_SPLIT_RATIO, gt=0.0, lt=1.0)
    seeds: List[int] = Field(default_factory=lambda: list(settings.DEFAULT_SEEDS), min_length=1)

    @field_validator("version", mode="before")
    def strip_version(cls, v):
        if isinstance(v, str):
            return v.strip()
        return v

    @model_validator(mode="before")
    def default_embedding_from_ladder(cls, data):
        if isinstance(data, dict) and data.get("embedding") is None:
            entry = load_ladder().get(str(data.get("version", "")).strip())
            if entry is not None:
                data = {**data, "embedding": entry.embedding}
        return data

    @model_validator(mode="after")
    def embedding_must_match_ladder(self):
        entry = load_ladder()[self.version]
        if self.embedding != entry.embedding:
            raise ValueError(
                f"{self.version} uses {entry.embedding.value} embeddings, not {self.embedding.value}"
            )
        return self

    @property
    def ladder_entry(self) -> LadderEntry:
        return load_ladder()[self.version]

    @property
    def family(self) -> ModelFamily:
        return self.ladder_entry.family

    @property
    def description(self) -> str:
        return self.ladder_entry.description

    @property
    def embedding_path(self) -> Optional[str]:
        if self.embedding == EmbeddingMode.GLOVE:
            return self.glove_path
        if self.embedding == EmbeddingMode.GN_GLOVE:
            return self.gn_glove_path
        return None

    def config_hash(self) -> str:
        """Short sha256 of the config without its seed list."""
        payload = self.model_dump_json(exclude={"seeds"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def load_config_file(path: str) -> List[ExperimentConfig]:
    """
    Read one flat experiment config, or a config set with an `experiments` list.

    Args:
        path: YAML file path

    Returns:
        List of validated experiment configs

    Raises:
        ConfigurationError: If the file is missing or any entry is invalid
    """
    try:
        with open(path, encoding="utf-8") as f:
            document = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"Config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Config file {path} is not valid YAML: {e}") from e

    if isinstance(document, dict) and "experiments" in document:
        defaults = {k: v for k, v in document.items() if k != "experiments"}
        entries = [{**defaults, **(entry or {})} for entry in document["experiments"] or []]
    elif isinstance(document, dict) and "versions" in document:
        # a ladder file: every version with default hyperparameters
        entries = [{"version": name} for name in document["versions"]]
    elif isinstance(document, dict):
        entries = [document]
    else:
        raise ConfigurationError(f"Config file {path} must contain a mapping")

    configs = []
    for idx, entry in enumerate(entries):
        try:
            configs.append(ExperimentConfig(**entry))
        except Exception as e:
            logger.error(f"Invalid experiment config #{idx} in {path}: {e}")
            raise ConfigurationError(f"Invalid experiment config #{idx} in {path}: {e}") from e

    if not configs:
        raise ConfigurationError(f"Config file {path} defines no experiments")
    return configs
