"""
Token vocabulary, sequence encoding and the vocabulary dump format.
"""
import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from sexism_detector.utils.exceptions import EmbeddingError, EmptyDatasetError

logger = logging.getLogger(__name__)

# Reserved entries; normalized tokens are lowercase, so these can never collide
PAD_TOKEN = "[PAD]"
OOV_TOKEN = "[OOV]"
PAD_INDEX = 0
OOV_INDEX = 1
RESERVED_TOKENS = (PAD_TOKEN, OOV_TOKEN)


@dataclass(frozen=True)
class Vocabulary:
    """
    Index -> token list with reserved padding (0) and OOV (1) entries.

    `frequencies` holds the training-corpus count of each entry (0 for the
    reserved ones).
    """

    tokens: Tuple[str, ...]
    frequencies: Tuple[int, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "frequencies", tuple(int(f) for f in self.frequencies))
        if self.tokens[:2] != RESERVED_TOKENS:
            raise EmbeddingError(f"Vocabulary must start with {RESERVED_TOKENS}, got {self.tokens[:2]}")
        if len(self.frequencies) != len(self.tokens):
            raise EmbeddingError("Vocabulary tokens and frequencies differ in length")
        index = {token: idx for idx, token in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise EmbeddingError("Vocabulary tokens are not unique")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index and token not in RESERVED_TOKENS

    def lookup(self, token: str) -> int:
        return self.index.get(token, OOV_INDEX) if token not in RESERVED_TOKENS else OOV_INDEX

    @property
    def corpus_tokens(self) -> Tuple[str, ...]:
        return self.tokens[2:]

    @property
    def sha256(self) -> str:
        """Hash of the index -> token list."""
        digest = hashlib.sha256()
        for token in self.tokens:
            digest.update(token.encode("utf-8"))
            digest.update(b"\n")
        return digest.hexdigest()


def build_vocab(token_lists: Iterable[Sequence[str]], min_freq: int = 1) -> Vocabulary:
    """
    Build a vocabulary from normalized statements.

    Tokens seen at least `min_freq` times are admitted, ordered by descending
    frequency and then lexicographically.

    Args:
        token_lists: Token sequences, e.g. Corpus.token_lists
        min_freq: Minimum count for admission

    Returns:
        Vocabulary

    Raises:
        EmptyDatasetError: If there are no statements
        EmbeddingError: If min_freq < 1
    """
    if min_freq < 1:
        raise EmbeddingError(f"min_freq must be >= 1, got {min_freq}")

    counts: Counter = Counter()
    n_statements = 0
    for tokens in token_lists:
        n_statements += 1
        counts.update(tokens)
    if n_statements == 0:
        raise EmptyDatasetError("Cannot build a vocabulary from an empty corpus")

    admitted = sorted(
        ((token, count) for token, count in counts.items() if count >= min_freq and token not in RESERVED_TOKENS),
        key=lambda item: (-item[1], item[0]),
    )
    logger.info(
        f"Vocabulary: {len(admitted)} of {len(counts)} distinct tokens admitted (min_freq {min_freq})"
    )
    return Vocabulary(
        tokens=RESERVED_TOKENS + tuple(token for token, _ in admitted),
        frequencies=(0, 0) + tuple(count for _, count in admitted),
    )


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int) -> Tuple[np.ndarray, int]:
    """
    Map tokens to a fixed-length index sequence.

    Long sequences are truncated from the right; short ones are right-padded
    with PAD_INDEX.

    Returns:
        (int64 array of length max_len, valid length)
    """
    if max_len < 1:
        raise EmbeddingError(f"max_len must be >= 1, got {max_len}")
    ids = np.full(max_len, PAD_INDEX, dtype=np.int64)
    valid = min(len(tokens), max_len)
    for position, token in enumerate(tokens[:valid]):
        ids[position] = vocab.lookup(token)
    return ids, valid


def encode_batch(token_lists: Sequence[Sequence[str]], vocab: Vocabulary, max_len: int) -> Tuple[np.ndarray, np.ndarray]:
    """Encode many statements: returns ids (N, max_len) and lengths (N,)."""
    ids = np.full((len(token_lists), max_len), PAD_INDEX, dtype=np.int64)
    lengths = np.zeros(len(token_lists), dtype=np.int64)
    for row, tokens in enumerate(token_lists):
        ids[row], lengths[row] = encode(tokens, vocab, max_len)
    return ids, lengths


def write_vocab(vocab: Vocabulary, path: Union[str, Path]) -> Path:
    """Write one `token<TAB>index<TAB>frequency` line per entry."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for idx, (token, freq) in enumerate(zip(vocab.tokens, vocab.frequencies)):
            f.write(f"{token}\t{idx}\t{freq}\n")
    return path


def read_vocab(path: Union[str, Path]) -> Vocabulary:
    """
    Read a vocabulary dump written by write_vocab.

    Raises:
        EmbeddingError: Missing file, malformed line or non-contiguous indices
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise EmbeddingError(f"Vocabulary file not found: {path}") from e

    tokens: List[str] = []
    frequencies: List[int] = []
    for line_no, line in enumerate(lines, start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise EmbeddingError(f"Malformed vocabulary line {line_no} in {path}: {line!r}")
        token, idx, freq = fields
        try:
            idx, freq = int(idx), int(freq)
        except ValueError as e:
            raise EmbeddingError(f"Malformed vocabulary line {line_no} in {path}: {line!r}") from e
        if idx != len(tokens):
            raise EmbeddingError(f"Vocabulary index {idx} at line {line_no} is out of order (expected {len(tokens)})")
        tokens.append(token)
        frequencies.append(freq)
    return Vocabulary(tokens=tuple(tokens), frequencies=tuple(frequencies))
