"""
Reading and writing word vectors in the GloVe text format.
"""
import functools
import gzip
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from sexism_detector import settings
from sexism_detector.utils.exceptions import DimensionMismatchError, EmbeddingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingTable:
    """
    Token -> vector table with a fixed dimension.

    Vectors are stored read-only; `duplicate_count` records how many lines
    overwrote an earlier entry while parsing.
    """

    dim: int
    entries: Dict[str, np.ndarray] = field(default_factory=dict)
    duplicate_count: int = 0
    source: Optional[str] = None

    def __post_init__(self):
        if self.dim < 1:
            raise EmbeddingError(f"Embedding dimension must be positive, got {self.dim}")
        entries = {token: np.array(vector, dtype=np.float64) for token, vector in self.entries.items()}
        object.__setattr__(self, "entries", entries)
        for token, vector in entries.items():
            if vector.shape != (self.dim,):
                raise DimensionMismatchError(
                    f"Vector for {token!r} has shape {vector.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(vector)):
                raise EmbeddingError(f"Vector for {token!r} has non-finite components")
            vector.setflags(write=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __getitem__(self, token: str) -> np.ndarray:
        return self.entries[token]

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.entries.get(token)

    def tokens(self) -> Iterator[str]:
        return iter(self.entries)

    def coverage(self, tokens: Iterable[str]) -> float:
        """Fraction of `tokens` with a vector in this table (0.0 for no tokens)."""
        tokens = list(tokens)
        if not tokens:
            return 0.0
        return sum(1 for t in tokens if t in self.entries) / len(tokens)


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8", newline="\n")
    return open(path, mode, encoding="utf-8", newline="\n")


def resolve_embedding_path(name: Union[str, Path], search_path: Optional[str] = None) -> Path:
    """
    Find an embedding file by path or by name on the embeddings search path.

    Args:
        name: File path, or bare file name looked up in each search directory
        search_path: os.pathsep-separated directories; settings.EMBEDDINGS_PATH when omitted

    Returns:
        Path of an existing file

    Raises:
        EmbeddingError: If no candidate exists
    """
    candidate = Path(name).expanduser()
    if candidate.is_file():
        return candidate

    search_path = settings.EMBEDDINGS_PATH if search_path is None else search_path
    for directory in filter(None, search_path.split(os.pathsep)):
        located = Path(directory).expanduser() / candidate
        if located.is_file():
            logger.debug(f"Resolved embedding file {name} -> {located}")
            return located

    logger.error(f"Embedding file not found: {name} (search path: {search_path!r})")
    raise EmbeddingError(f"Embedding file not found: {name}")


def parse_embedding_file(
    path: Union[str, Path],
    restrict_to: Optional[Iterable[str]] = None,
) -> EmbeddingTable:
    """
    Parse a GloVe text-format file (gzip-compressed when the suffix is .gz).

    Each line is a token followed by `dim` space-separated floats; the first
    line fixes `dim`. Later duplicates replace earlier vectors with a
    warning. With `restrict_to`, only those tokens are kept; every line is
    still checked for its dimension. Results are cached per (file, restriction).

    Args:
        path: Embedding file
        restrict_to: Optional set of tokens to keep

    Returns:
        EmbeddingTable

    Raises:
        EmbeddingError: Missing file, empty file or a non-numeric/non-finite value
        DimensionMismatchError: A line whose vector length differs from the first line's
    """
    path = Path(path)
    if not path.is_file():
        raise EmbeddingError(f"Embedding file not found: {path}")
    stat = path.stat()
    restriction = frozenset(restrict_to) if restrict_to is not None else None
    return _parse_cached(str(path.resolve()), stat.st_mtime_ns, stat.st_size, restriction)


@functools.lru_cache(maxsize=8)
def _parse_cached(
    path: str,
    mtime_ns: int,
    size: int,
    restriction: Optional[FrozenSet[str]],
) -> EmbeddingTable:
    entries: Dict[str, np.ndarray] = {}
    dim: Optional[int] = None
    duplicates = 0
    n_lines = 0

    with _open_text(Path(path), "r") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.rstrip(" ").split(" ")
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise EmbeddingError(f"No vector values at line {line_no} of {path}")
                dim = len(values)
            elif len(values) != dim:
                raise DimensionMismatchError(
                    f"dimension mismatch at line {line_no}: expected {dim} values, got {len(values)}"
                )
            n_lines += 1
            if restriction is not None and token not in restriction:
                continue

            try:
                vector = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as e:
                raise EmbeddingError(f"Non-numeric value at line {line_no} of {path}: {e}") from e
            if not np.all(np.isfinite(vector)):
                raise EmbeddingError(f"Non-finite value at line {line_no} of {path}")

            if token in entries:
                duplicates += 1
                logger.warning(f"Duplicate embedding token {token!r} at line {line_no}; keeping the later vector")
            entries[token] = vector

    if dim is None:
        raise EmbeddingError(f"Embedding file is empty: {path}")

    logger.info(f"Parsed {len(entries)} of {n_lines} vectors (dim {dim}) from {path}")
    return EmbeddingTable(dim=dim, entries=entries, duplicate_count=duplicates, source=path)


def write_embedding_file(table: EmbeddingTable, path: Union[str, Path], tokens: Optional[Sequence[str]] = None) -> Path:
    """
    Write a table in GloVe text format with full float precision.

    Args:
        table: Table to write
        path: Output file; gzip-compressed when the suffix is .gz
        tokens: Optional token order; table order when omitted

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open_text(path, "w") as f:
        for token in tokens if tokens is not None else table.tokens():
            vector = table[token]
            f.write(token + " " + " ".join(repr(float(v)) for v in vector) + "\n")
    return path


def clear_cache() -> None:
    _parse_cached.cache_clear()
