"""
Corpus containers.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

from sexism_detector.schema.config_schema import DatasetSchema
from sexism_detector.schema.statement_schema import Statement
from sexism_detector.utils.exceptions import CorpusError


@dataclass(frozen=True)
class Corpus:
    """
    Ordered, immutable collection of statements.

    `columns` keeps the input file's column order so split files can be
    written back with the same schema; `rejected_rows` holds load diagnostics.
    """

    statements: Tuple[Statement, ...]
    schema: DatasetSchema = field(default_factory=DatasetSchema)
    columns: Tuple[str, ...] = ()
    rejected_rows: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))
        if not self.columns:
            object.__setattr__(self, "columns", (self.schema.text_column, self.schema.label_column))

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements)

    def __getitem__(self, idx: int) -> Statement:
        return self.statements[idx]

    @property
    def labels(self) -> List[int]:
        return [s.label for s in self.statements]

    @property
    def token_lists(self) -> List[Tuple[str, ...]]:
        return [s.tokens for s in self.statements]

    @property
    def positive_fraction(self) -> float:
        if not self.statements:
            raise CorpusError("Class proportions of an empty corpus are undefined")
        return sum(self.labels) / len(self.statements)

    def with_statements(self, statements) -> "Corpus":
        return dataclasses.replace(self, statements=tuple(statements))


@dataclass(frozen=True)
class SplitPair:
    """Disjoint train/test corpora produced by a stratified split."""

    train: Corpus
    test: Corpus
    seed: int
    ratio: float

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise CorpusError(f"Split ratio must lie in (0, 1), got {self.ratio}")
        overlap = set(self.train.token_lists) & set(self.test.token_lists)
        if overlap:
            raise CorpusError(f"Train and test share {len(overlap)} normalized statements")

    @property
    def stratification_gap(self) -> float:
        """|positive fraction(train) - positive fraction(test)|"""
        return abs(self.train.positive_fraction - self.test.positive_fraction)
