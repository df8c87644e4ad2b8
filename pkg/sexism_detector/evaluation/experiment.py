"""
Experiment orchestration: train a ladder row per seed, evaluate it on the
test split and collect report rows.
"""
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from sexism_detector.corpus.models import Corpus, SplitPair
from sexism_detector.evaluation.metrics import ConfusionCounts, confusion, precision_recall_f1
from sexism_detector.factory import create_trainer
from sexism_detector.schema.config_schema import ExperimentConfig, load_ladder
from sexism_detector.schema.report_schema import AggregateRow, ReportHeader, ReportRow, TrainingSummary
from sexism_detector.utils.exceptions import MetricsError

logger = logging.getLogger(__name__)

TrainerFactory = Callable[..., object]


@dataclass
class ExperimentResult:
    """Per-seed rows, their aggregate and the training summaries behind them."""

    config: ExperimentConfig
    rows: List[ReportRow]
    aggregate: AggregateRow
    summaries: List[TrainingSummary] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.aggregate.status == "failed"


@dataclass
class MetricsReport:
    header: Optional[ReportHeader]
    results: List[ExperimentResult]
    errors: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def rows(self) -> List[ReportRow]:
        return [row for result in self.results for row in result.rows]

    @property
    def aggregates(self) -> List[AggregateRow]:
        return [result.aggregate for result in self.results]

    def aggregate_for(self, version: str) -> Optional[AggregateRow]:
        return next((a for a in self.aggregates if a.model == version), None)


def evaluate_model(model, corpus: Corpus) -> Tuple[ConfusionCounts, Tuple[float, float, float]]:
    """
    Predict every statement of a normalized corpus with a trained classifier.

    Args:
        model: Any classifier exposing predict(token_lists) -> (probabilities, labels)
        corpus: Corpus with tokens filled in

    Returns:
        Tuple of (confusion counts, (precision, recall, f1))

    Raises:
        MetricsError: If the corpus is empty
    """
    if len(corpus) == 0:
        raise MetricsError("Cannot evaluate on an empty corpus")
    _, labels = model.predict(corpus.token_lists)
    counts = confusion(labels, corpus.labels)
    return counts, precision_recall_f1(counts)


def _std(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) >= 2 else 0.0


def aggregate_rows(config: ExperimentConfig, rows: Sequence[ReportRow]) -> AggregateRow:
    """Mean and sample standard deviation over the ok rows of one config."""
    ok = [row for row in rows if row.status == "ok"]
    base = dict(
        model=config.version,
        description=config.description,
        embedding=config.embedding.value,
        n_seeds=len(ok),
        n_failed=len(rows) - len(ok),
    )
    if not ok:
        return AggregateRow(**base, status="failed")

    metrics = {}
    for name in ("precision", "recall", "f1"):
        values = [getattr(row, name) for row in ok]
        metrics[f"{name}_mean"] = float(np.mean(values))
        metrics[f"{name}_std"] = _std(values)
    return AggregateRow(**base, **metrics)


def _failed_rows(config: ExperimentConfig, message: str) -> List[ReportRow]:
    return [
        ReportRow(
            model=config.version,
            description=config.description,
            embedding=config.embedding.value,
            seed=seed,
            config_hash=config.config_hash(),
            status="failed",
            error=message,
        )
        for seed in config.seeds
    ]


def run_experiment(
    config: ExperimentConfig,
    split: SplitPair,
    trainer_factory: Optional[TrainerFactory] = None,
    search_path: Optional[str] = None,
    slang_map: Optional[Mapping[str, str]] = None,
) -> ExperimentResult:
    """
    Train and evaluate one ladder row once per configured seed.

    Args:
        config: Experiment config
        split: Prepared train/test split
        trainer_factory: Builds the trainer for a config; factory.create_trainer by default
        search_path: Embedding search path handed to the factory
        slang_map: Slang table stored with the trained models

    Returns:
        ExperimentResult with one row per seed and the aggregate row

    Raises:
        TrainingAbortedError: A seed produced a non-finite loss; carries the config
    """
    trainer_factory = trainer_factory or create_trainer
    trainer = trainer_factory(config, search_path=search_path, slang_map=slang_map)
    rows: List[ReportRow] = []
    summaries: List[TrainingSummary] = []

    for seed in config.seeds:
        started = time.perf_counter()
        classifier, summary = trainer.train(split.train.token_lists, split.train.labels, seed)
        counts, (precision, recall, f1) = evaluate_model(classifier, split.test)
        wallclock = time.perf_counter() - started

        logger.info(
            f"[{config.version}] seed {seed}: P={precision:.4f} R={recall:.4f} F1={f1:.4f} "
            f"({summary.epochs} epochs, {wallclock:.1f}s)"
        )
        rows.append(ReportRow(
            model=config.version,
            description=config.description,
            embedding=config.embedding.value,
            seed=seed,
            precision=precision,
            recall=recall,
            f1=f1,
            epochs=summary.epochs,
            wallclock_s=wallclock,
            config_hash=config.config_hash(),
            predicted_positive_rate=counts.predicted_positive_rate,
        ))
        summaries.append(summary)

    return ExperimentResult(config=config, rows=rows, aggregate=aggregate_rows(config, rows), summaries=summaries)


class ReportSink:
    """Thread-safe collector of experiment results."""

    def __init__(self):
        self._lock = threading.Lock()
        self._results: Dict[int, ExperimentResult] = {}
        self._errors: Dict[int, Tuple[str, str]] = {}

    def add(self, position: int, result: ExperimentResult, error: Optional[str] = None) -> None:
        with self._lock:
            self._results[position] = result
            if error is not None:
                self._errors[position] = (result.config.version, error)

    def ordered(self) -> List[ExperimentResult]:
        with self._lock:
            return [self._results[k] for k in sorted(self._results)]

    @property
    def errors(self) -> List[Tuple[str, str]]:
        with self._lock:
            return [self._errors[k] for k in sorted(self._errors)]


def _ladder_position(config: ExperimentConfig) -> int:
    return list(load_ladder()).index(config.version)


def reproduce_table(
    configs: Sequence[ExperimentConfig],
    split: SplitPair,
    workers: int = 1,
    header: Optional[ReportHeader] = None,
    trainer_factory: Optional[TrainerFactory] = None,
    search_path: Optional[str] = None,
    slang_map: Optional[Mapping[str, str]] = None,
) -> MetricsReport:
    """
    Run every config and gather the report in ladder order.

    A config that raises is reported as failed; the others still run.
    With workers > 1 experiments run on a thread pool; the result does not
    depend on the number of workers.
    """
    ordered = sorted(enumerate(configs), key=lambda item: (_ladder_position(item[1]), item[0]))
    sink = ReportSink()

    def run_one(position: int, config: ExperimentConfig) -> None:
        try:
            result = run_experiment(config, split, trainer_factory, search_path, slang_map)
            sink.add(position, result)
        except Exception as e:
            logger.warning(f"[{config.version}] experiment failed: {e}")
            rows = _failed_rows(config, str(e))
            sink.add(position, ExperimentResult(config, rows, aggregate_rows(config, rows)), error=str(e))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one, pos, config) for pos, (_, config) in enumerate(ordered)]
            for future in futures:
                future.result()
    else:
        for pos, (_, config) in enumerate(ordered):
            run_one(pos, config)

    report = MetricsReport(header=header, results=sink.ordered(), errors=sink.errors)
    logger.info(f"Ladder finished: {len(report.results)} experiments, {len(report.errors)} failed")
    return report
