"""
Versioned JSON checkpoint container shared by every model kind.

Floats are written with their shortest round-trip repr, so loading gives
back bit-identical tensors.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from sexism_detector.embeddings.vocabulary import Vocabulary
from sexism_detector.utils.exceptions import CheckpointError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "sexism-detector-checkpoint"
CHECKPOINT_VERSION = 1
CHECKPOINT_KINDS = ("neural", "logreg", "gbdt")


@dataclass
class Checkpoint:
    """
    Everything needed to rebuild a trained classifier.

    `config` is the experiment config as a plain mapping; `extra` holds
    kind-specific records (e.g. the GBDT tree list).
    """

    kind: str
    config: Dict[str, Any]
    vocabulary: Vocabulary
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)
    slang_map: Dict[str, str] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)


def _encode_tensor(name: str, value: np.ndarray) -> Dict[str, Any]:
    value = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(value)):
        raise CheckpointError(f"Tensor {name} has non-finite entries")
    return {"shape": list(value.shape), "data": [float(v) for v in value.ravel()]}


def _decode_tensor(name: str, record: Mapping[str, Any]) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in record["shape"])
        data = np.array(record["data"], dtype=np.float64)
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Tensor {name} is malformed: {e}") from e


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    """
    Write a checkpoint as JSON.

    Raises:
        CheckpointError: Unknown kind, non-finite tensors or unwritable path
    """
    if checkpoint.kind not in CHECKPOINT_KINDS:
        raise CheckpointError(f"Unknown checkpoint kind {checkpoint.kind!r}")
    vocab = checkpoint.vocabulary
    document = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": checkpoint.kind,
        "config": checkpoint.config,
        "vocabulary": {
            "tokens": list(vocab.tokens),
            "frequencies": list(vocab.frequencies),
            "sha256": vocab.sha256,
        },
        "slang_map": dict(checkpoint.slang_map),
        "tensors": {name: _encode_tensor(name, value) for name, value in checkpoint.tensors.items()},
        "extra": checkpoint.extra,
    }

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, ensure_ascii=False, allow_nan=False)
    except (OSError, ValueError) as e:
        logger.error(f"Failed to write checkpoint {path}: {e}")
        raise CheckpointError(f"Failed to write checkpoint {path}: {e}") from e

    logger.info(f"Saved {checkpoint.kind} checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path], expected_kind: Optional[str] = None) -> Checkpoint:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointError: Missing or malformed file, unsupported version,
            wrong kind or vocabulary hash mismatch
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError as e:
        raise CheckpointError(f"Checkpoint not found: {path}") from e
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError(f"Checkpoint {path} is not valid JSON: {e}") from e

    if not isinstance(document, dict) or document.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if document.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {document.get('version')} in {path}")
    kind = document.get("kind")
    if kind not in CHECKPOINT_KINDS or (expected_kind and kind != expected_kind):
        raise CheckpointError(f"Checkpoint {path} has kind {kind!r}, expected {expected_kind or CHECKPOINT_KINDS}")

    try:
        vocab_record = document["vocabulary"]
        vocabulary = Vocabulary(tokens=tuple(vocab_record["tokens"]), frequencies=tuple(vocab_record["frequencies"]))
    except Exception as e:
        raise CheckpointError(f"Checkpoint {path} has a malformed vocabulary: {e}") from e
    if vocabulary.sha256 != vocab_record.get("sha256"):
        raise CheckpointError(f"Vocabulary hash mismatch in {path}")

    return Checkpoint(
        kind=kind,
        config=document.get("config") or {},
        vocabulary=vocabulary,
        tensors={name: _decode_tensor(name, record) for name, record in (document.get("tensors") or {}).items()},
        slang_map=document.get("slang_map") or {},
        extra=document.get("extra") or {},
    )
