"""
Deduplication, class balance and the seeded stratified train/test split.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np

from sexism_detector.corpus.models import Corpus, SplitPair
from sexism_detector.utils.exceptions import CorpusError

logger = logging.getLogger(__name__)


def deduplicate(corpus: Corpus) -> Tuple[Corpus, int]:
    """
    Keep the first statement of every normalized token sequence.

    Returns:
        Tuple of (deduplicated corpus, number of dropped statements)
    """
    seen = set()
    kept = []
    for statement in corpus:
        if statement.tokens in seen:
            continue
        seen.add(statement.tokens)
        kept.append(statement)

    dropped = len(corpus) - len(kept)
    if dropped:
        logger.info(f"Dropped {dropped} duplicate statements ({len(kept)} remain)")
    return corpus.with_statements(kept), dropped


def class_balance(corpus: Corpus) -> Tuple[float, float]:
    """
    Returns:
        (fraction sexist, fraction neutral)

    Raises:
        CorpusError: If the corpus is empty
    """
    positive = corpus.positive_fraction
    return positive, 1.0 - positive


def stratified_split(corpus: Corpus, ratio: float, seed: int) -> SplitPair:
    """
    Split a deduplicated corpus into train/test with class proportions kept.

    Each class is shuffled on its own with a generator seeded by `seed`
    (classes visited in label order), and round(n * (1 - ratio)) of its
    members, kept within [1, n - 1], go to test. Both halves keep the
    corpus order of their statements.

    Args:
        corpus: Normalized, deduplicated corpus
        ratio: Train fraction in (0, 1)
        seed: Shuffle seed

    Returns:
        SplitPair

    Raises:
        CorpusError: Invalid ratio or a class with fewer than two members
    """
    if not 0.0 < ratio < 1.0:
        raise CorpusError(f"Split ratio must lie in (0, 1), got {ratio}")

    by_class: Dict[int, List[int]] = {0: [], 1: []}
    for idx, statement in enumerate(corpus):
        by_class[statement.label].append(idx)
    for label, members in by_class.items():
        if len(members) < 2:
            raise CorpusError(
                f"Class {label} has {len(members)} statement(s); a stratified split needs at least 2 per class"
            )

    rng = np.random.default_rng(seed)
    test_indices = set()
    for label in sorted(by_class):
        members = np.array(by_class[label])
        shuffled = rng.permutation(members)
        n_test = int(round(len(members) * (1.0 - ratio)))
        n_test = min(max(n_test, 1), len(members) - 1)
        test_indices.update(int(i) for i in shuffled[:n_test])

    train = [s for i, s in enumerate(corpus) if i not in test_indices]
    test = [s for i, s in enumerate(corpus) if i in test_indices]
    split = SplitPair(
        train=corpus.with_statements(train),
        test=corpus.with_statements(test),
        seed=seed,
        ratio=ratio,
    )
    logger.info(
        f"Split {len(corpus)} statements into {len(train)} train / {len(test)} test "
        f"(seed {seed}, stratification gap {split.stratification_gap:.4f})"
    )
    return split
