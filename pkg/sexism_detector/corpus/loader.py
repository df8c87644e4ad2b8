"""
Dataset reading and split-file writing.
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from sexism_detector.corpus.models import Corpus, SplitPair
from sexism_detector.corpus.normalizer import TextNormalizer
from sexism_detector.schema.config_schema import DatasetSchema
from sexism_detector.schema.statement_schema import Statement
from sexism_detector.utils.exceptions import CorpusError, EmptyDatasetError

logger = logging.getLogger(__name__)

NORMALIZED_COLUMN = "normalized"
JSONL_SUFFIXES = {".jsonl", ".json"}

# Bundled 200-statement stand-in for the published dataset
FIXTURE_CORPUS_PATH = Path(__file__).parent.parent / "resources" / "fixture_corpus.csv"


def _read_frame(path: Path) -> pd.DataFrame:
    if path.suffix.lower() in JSONL_SUFFIXES:
        frame = pd.read_json(path, lines=True, dtype=False, encoding="utf-8")
        return frame.astype(object).where(frame.notna(), None)
    return pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")


def load_dataset(
    path: Union[str, Path],
    schema: Optional[DatasetSchema] = None,
    normalizer: Optional[TextNormalizer] = None,
) -> Corpus:
    """
    Load a labeled statement dataset, one Statement per data row.

    Rows whose label is not 0/1 are rejected with a diagnostic naming the
    row number (1-based, header excluded); the remaining rows are kept in
    file order. Raw text is kept exactly as read.

    Args:
        path: CSV (header row, UTF-8) or JSONL file
        schema: Column names; defaults to ("text", "label")
        normalizer: When given, tokens are filled in as rows are loaded

    Returns:
        Corpus of the accepted rows

    Raises:
        CorpusError: Missing file or missing column
        EmptyDatasetError: No data rows, or no valid rows
    """
    schema = schema or DatasetSchema()
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"Dataset file not found: {path}")

    try:
        frame = _read_frame(path)
    except pd.errors.EmptyDataError as e:
        raise EmptyDatasetError(f"empty dataset: {path}") from e
    except (UnicodeDecodeError, ValueError, pd.errors.ParserError) as e:
        logger.error(f"Failed to parse dataset {path}: {e}")
        raise CorpusError(f"Failed to parse dataset {path}: {e}") from e

    columns = [str(c) for c in frame.columns]
    for column in (schema.text_column, schema.label_column, schema.source_column):
        if column is not None and column not in columns:
            raise CorpusError(f"missing column '{column}' in {path} (found {columns})")
    if frame.empty:
        raise EmptyDatasetError(f"empty dataset: {path}")

    extra_columns = [c for c in columns if c not in (schema.text_column, schema.label_column, NORMALIZED_COLUMN)]
    statements: List[Statement] = []
    rejected: List[str] = []
    for row_no, record in enumerate(frame.to_dict(orient="records"), start=1):
        raw_text = record.get(schema.text_column)
        label = record.get(schema.label_column)
        try:
            statement = Statement(
                raw_text=raw_text,
                label=label,
                source_tag=record.get(schema.source_column) if schema.source_column else None,
                extra={c: "" if record.get(c) is None else str(record.get(c)) for c in extra_columns},
                tokens=normalizer.normalize(raw_text) if normalizer and isinstance(raw_text, str) else (),
            )
        except ValidationError as e:
            reason = "; ".join(err["msg"] for err in e.errors())
            diagnostic = f"row {row_no}: rejected (label {label!r}): {reason}"
            logger.warning(f"{path.name} {diagnostic}")
            rejected.append(diagnostic)
            continue
        statements.append(statement)

    if not statements:
        raise EmptyDatasetError(f"empty dataset: no valid rows in {path}")

    logger.info(f"Loaded {len(statements)} statements from {path} ({len(rejected)} rejected)")
    return Corpus(
        statements=tuple(statements),
        schema=schema,
        columns=tuple(c for c in columns if c != NORMALIZED_COLUMN),
        rejected_rows=tuple(rejected),
    )


def normalize_corpus(corpus: Corpus, normalizer: TextNormalizer) -> Tuple[Corpus, int]:
    """
    Fill in tokens for every statement and drop the ones left empty.

    Args:
        corpus: Loaded corpus
        normalizer: Normalizer carrying the slang table

    Returns:
        Tuple of (normalized corpus, number of statements dropped as empty)
    """
    kept = []
    dropped = 0
    for idx, statement in enumerate(corpus):
        tokens = normalizer.normalize(statement.raw_text)
        if not tokens:
            logger.warning(f"Statement {idx + 1} is empty after normalization, dropping: {statement.raw_text[:40]!r}")
            dropped += 1
            continue
        kept.append(statement.model_copy(update={"tokens": tokens}))
    return corpus.with_statements(kept), dropped


def load_prepared(
    path: Union[str, Path],
    schema: Optional[DatasetSchema] = None,
    normalizer: Optional[TextNormalizer] = None,
) -> Corpus:
    """
    Load a split file written by write_split, taking tokens from its
    `normalized` column; files without it are normalized with `normalizer`.

    Raises:
        CorpusError: If the file has no `normalized` column and no normalizer is given
    """
    corpus = load_dataset(path, schema)
    frame = _read_frame(Path(path))
    if NORMALIZED_COLUMN not in frame.columns:
        if normalizer is None:
            raise CorpusError(f"{path} has no '{NORMALIZED_COLUMN}' column and no normalizer was given")
        corpus, _ = normalize_corpus(corpus, normalizer)
        return corpus

    # Rejected rows were skipped by load_dataset; line tokens up by raw row order
    valid_rows = _accepted_row_numbers(corpus, len(frame))
    normalized = frame[NORMALIZED_COLUMN].tolist()
    statements = []
    for statement, row_no in zip(corpus, valid_rows):
        tokens = tuple(str(normalized[row_no - 1] or "").split())
        if not tokens:
            logger.warning(f"{Path(path).name} row {row_no}: empty '{NORMALIZED_COLUMN}' value, dropping")
            continue
        statements.append(statement.model_copy(update={"tokens": tokens}))
    return corpus.with_statements(statements)


def _accepted_row_numbers(corpus: Corpus, n_rows: int) -> List[int]:
    rejected = {int(d.split(":", 1)[0].split()[1]) for d in corpus.rejected_rows}
    return [r for r in range(1, n_rows + 1) if r not in rejected]


def _split_frame(corpus: Corpus) -> pd.DataFrame:
    schema = corpus.schema
    records: List[Dict[str, str]] = []
    for statement in corpus:
        record = {}
        for column in corpus.columns:
            if column == schema.text_column:
                record[column] = statement.raw_text
            elif column == schema.label_column:
                record[column] = str(statement.label)
            elif column == schema.source_column:
                record[column] = statement.source_tag or ""
            else:
                record[column] = statement.extra.get(column, "")
        record[NORMALIZED_COLUMN] = " ".join(statement.tokens)
        records.append(record)
    return pd.DataFrame(records, columns=list(corpus.columns) + [NORMALIZED_COLUMN])


def write_split(
    split: SplitPair,
    out_dir: Union[str, Path],
    stats: Optional[Dict[str, object]] = None,
    overwrite: bool = False,
) -> Dict[str, Path]:
    """
    Write train.csv, test.csv and stats.json into out_dir.

    Args:
        split: The split to write
        out_dir: Output directory (created when missing)
        stats: Extra summary fields merged into stats.json
        overwrite: Replace an already-prepared directory

    Returns:
        Mapping of file role to written path

    Raises:
        CorpusError: If out_dir already holds a prepared split and overwrite is False
    """
    out_dir = Path(out_dir)
    paths = {
        "train": out_dir / "train.csv",
        "test": out_dir / "test.csv",
        "stats": out_dir / "stats.json",
    }
    if not overwrite and any(p.exists() for p in paths.values()):
        raise CorpusError(f"{out_dir} already contains a prepared split (use --force to overwrite)")
    out_dir.mkdir(parents=True, exist_ok=True)

    for role in ("train", "test"):
        frame = _split_frame(getattr(split, role))
        frame.to_csv(paths[role], index=False, encoding="utf-8", lineterminator="\n")

    summary = {
        "seed": split.seed,
        "ratio": split.ratio,
        "n_train": len(split.train),
        "n_test": len(split.test),
        "train_positive_fraction": split.train.positive_fraction,
        "test_positive_fraction": split.test.positive_fraction,
        "stratification_gap": split.stratification_gap,
        **(stats or {}),
    }
    with open(paths["stats"], "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=4, ensure_ascii=False)

    logger.info(f"Wrote split to {out_dir}: {len(split.train)} train / {len(split.test)} test")
    return paths
