"""
Command-line entry point: prepare, train, eval, bench, classify and inspect-embeddings.

Exit codes: 0 success, 1 user error, 2 internal error (including aborted training).
"""
import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from sexism_detector import __version__, settings
from sexism_detector.corpus.loader import (
    FIXTURE_CORPUS_PATH,
    load_dataset,
    load_prepared,
    normalize_corpus,
    write_split,
)
from sexism_detector.corpus.models import SplitPair
from sexism_detector.corpus.normalizer import TextNormalizer
from sexism_detector.corpus.slang import load_slang_map
from sexism_detector.corpus.splitter import class_balance, deduplicate, stratified_split
from sexism_detector.embeddings.table import parse_embedding_file, resolve_embedding_path
from sexism_detector.embeddings.vocabulary import build_vocab, read_vocab
from sexism_detector.evaluation.experiment import (
    ExperimentResult,
    MetricsReport,
    aggregate_rows,
    evaluate_model,
    reproduce_table,
)
from sexism_detector.evaluation.report import print_report, render_text, write_report, write_run_summary
from sexism_detector.factory import create_trainer, load_classifier
from sexism_detector.schema.config_schema import LADDER_PATH, DatasetSchema, load_config_file
from sexism_detector.schema.report_schema import ReportHeader, ReportRow
from sexism_detector.utils.exceptions import ConfigurationError, DetectorError, TrainingAbortedError
from sexism_detector.utils.logging_setup import LOG_FILE_FORMAT, WarningCollector, configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2

SKIP_MARKER = "skip"
EXPLAIN_TOP_K = 5


class UsageError(DetectorError):
    """Bad or unknown command-line arguments."""
    pass


class DetectorArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as exceptions so they map onto exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}")
    if not number > 0.0 or number == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {value!r}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = DetectorArgumentParser(
        prog="sexism-detector",
        description="Workplace sexism detection: data preparation, training, evaluation and classification",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Log level (default: SEXISM_DETECTOR_LOG_LEVEL or INFO)")
    parser.add_argument("--log-file", default=None, help="Also write logs to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    prepare = commands.add_parser("prepare", help="Normalize, deduplicate and split a labeled dataset")
    prepare.add_argument("--data", required=True, help="Input CSV or JSONL dataset")
    prepare.add_argument("--slang-map", default=None, help="Slang table (TSV); bundled table by default")
    prepare.add_argument("--ratio", type=float, default=settings.DEFAULT_SPLIT_RATIO, help="Train fraction")
    prepare.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Split seed")
    prepare.add_argument("--out-dir", default=settings.DATA_DIR, help="Directory for train.csv / test.csv / stats.json")
    prepare.add_argument("--text-column", default=settings.DEFAULT_TEXT_COLUMN)
    prepare.add_argument("--label-column", default=settings.DEFAULT_LABEL_COLUMN)
    prepare.add_argument("--force", action="store_true", help="Overwrite an already-prepared directory")
    prepare.set_defaults(handler=cmd_prepare)

    train = commands.add_parser("train", help="Train one ladder row and write its checkpoint")
    train.add_argument("--config", required=True, help="Flat YAML experiment config")
    train.add_argument("--train-csv", default=str(Path(settings.DATA_DIR) / "train.csv"))
    train.add_argument("--embeddings", default=None, help="Embedding search path (overrides SEXISM_DETECTOR_EMBEDDINGS_PATH)")
    train.add_argument("--out-model", required=True, help="Checkpoint path (JSON)")
    train.add_argument("--seed", type=int, default=None, help="Training seed (default: first seed of the config)")
    train.add_argument("--learning-rate", type=positive_float, default=None, help="Override the config's Adam learning rate")
    train.add_argument("--slang-map", default=None)
    train.set_defaults(handler=cmd_train)

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint on a prepared split file")
    evaluate.add_argument("--model", required=True, help="Checkpoint path")
    evaluate.add_argument("--test-csv", default=str(Path(settings.DATA_DIR) / "test.csv"))
    evaluate.add_argument("--out-report", default=None, help="JSONL report path")
    evaluate.set_defaults(handler=cmd_eval)

    bench = commands.add_parser("bench", help="Train and evaluate every config of a set (the results table)")
    bench.add_argument("--config-set", default=str(LADDER_PATH), help="YAML config set or ladder file")
    bench.add_argument("--data-dir", default=settings.DATA_DIR, help="Prepared split directory")
    bench.add_argument("--out-report", default=None, help="JSONL report path (default: <run dir>/report.jsonl)")
    bench.add_argument("--output-dir", default=settings.OUTPUT_DIR, help="Parent of the timestamped run directory")
    bench.add_argument("--embeddings", default=None, help="Embedding search path")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Split seed for the fixture fallback")
    bench.add_argument("--slang-map", default=None)
    bench.set_defaults(handler=cmd_bench)

    classify = commands.add_parser("classify", help="Print probability and label for each input line")
    classify.add_argument("--model", required=True, help="Checkpoint path")
    source = classify.add_mutually_exclusive_group(required=True)
    source.add_argument("--text", help="Statement(s) to classify, one per line")
    source.add_argument("--stdin", action="store_true", help="Read statements from standard input")
    classify.add_argument("--explain", action="store_true", help="Append the most attended tokens (V4 models)")
    classify.set_defaults(handler=cmd_classify)

    inspect = commands.add_parser("inspect-embeddings", help="Describe an embedding file")
    inspect.add_argument("--embeddings", required=True, help="Embedding file path or name")
    vocab_source = inspect.add_mutually_exclusive_group()
    vocab_source.add_argument("--vocab", default=None, help="Vocabulary dump")
    vocab_source.add_argument("--train-csv", default=None, help="Prepared split file to build a vocabulary from")
    inspect.set_defaults(handler=cmd_inspect_embeddings)

    return parser


def _normalizer(slang_path: Optional[str]) -> TextNormalizer:
    return TextNormalizer(load_slang_map(slang_path))


def prepare_split(
    data: Path,
    schema: DatasetSchema,
    normalizer: TextNormalizer,
    ratio: float,
    seed: int,
) -> Tuple[SplitPair, Dict[str, object]]:
    """Load, normalize, deduplicate and split; returns the split and its stats."""
    corpus = load_dataset(data, schema)
    corpus, empty_dropped = normalize_corpus(corpus, normalizer)
    corpus, duplicates = deduplicate(corpus)
    split = stratified_split(corpus, ratio, seed)
    positive, negative = class_balance(corpus)
    stats = {
        "source": str(data),
        "n_statements": len(corpus),
        "rejected_rows": len(corpus.rejected_rows),
        "empty_dropped": empty_dropped,
        "duplicates_dropped": duplicates,
        "class_balance": {"sexist": positive, "neutral": negative},
    }
    return split, stats


def cmd_prepare(args) -> int:
    schema = DatasetSchema(text_column=args.text_column, label_column=args.label_column)
    split, stats = prepare_split(Path(args.data), schema, _normalizer(args.slang_map), args.ratio, args.seed)
    write_split(split, args.out_dir, stats=stats, overwrite=args.force)

    balance = stats["class_balance"]
    print(f"statements: {stats['n_statements']} ({len(split.train)} train / {len(split.test)} test)")
    print(f"class balance: {balance['sexist']:.1%} sexist / {balance['neutral']:.1%} neutral")
    print(f"duplicates dropped: {stats['duplicates_dropped']}")
    print(f"empty after normalization: {stats['empty_dropped']}")
    return EXIT_OK


def cmd_train(args) -> int:
    configs = load_config_file(args.config)
    if len(configs) != 1:
        raise ConfigurationError(f"{args.config} defines {len(configs)} experiments; train expects one")
    config = configs[0]
    seed = config.seeds[0] if args.seed is None else args.seed
    overrides = {"seeds": [seed]}
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    config = config.model_copy(update=overrides)

    slang_map = load_slang_map(args.slang_map)
    corpus = load_prepared(args.train_csv, normalizer=TextNormalizer(slang_map))
    trainer = create_trainer(config, search_path=args.embeddings, slang_map=slang_map)
    classifier, summary = trainer.train(corpus.token_lists, corpus.labels, seed)
    classifier.save(args.out_model)

    sidecar = Path(args.out_model).with_suffix(".loss.json")
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump({"version": config.version, "seed": seed, **summary.model_dump()}, f, indent=4, ensure_ascii=False)
    logger.info(f"Loss history saved to: {sidecar}")

    final = summary.final_loss
    print(f"{config.version} seed {seed}: final loss {final:.6f}" if final is not None else f"{config.version}: trained")
    return EXIT_OK


def cmd_eval(args) -> int:
    classifier = load_classifier(args.model)
    config = classifier.config
    corpus = load_prepared(args.test_csv, normalizer=TextNormalizer(classifier.slang_map))
    counts, (precision, recall, f1) = evaluate_model(classifier, corpus)

    row = ReportRow(
        model=config.version,
        description=config.description,
        embedding=config.embedding.value,
        seed=config.seeds[0],
        precision=precision,
        recall=recall,
        f1=f1,
        config_hash=config.config_hash(),
        predicted_positive_rate=counts.predicted_positive_rate,
    )
    report = MetricsReport(header=None, results=[ExperimentResult(config, [row], aggregate_rows(config, [row]))])
    print_report(report)
    print(f"tp={counts.tp} fp={counts.fp} fn={counts.fn} tn={counts.tn}")
    if args.out_report:
        write_report(report, args.out_report)
    return EXIT_OK


def _bench_split(data_dir: Path, normalizer: TextNormalizer, ratio: float, seed: int) -> Tuple[SplitPair, ReportHeader]:
    train_path, test_path = data_dir / "train.csv", data_dir / "test.csv"
    if train_path.is_file() and test_path.is_file():
        stats_path = data_dir / "stats.json"
        if stats_path.is_file():
            with open(stats_path, encoding="utf-8") as f:
                stats = json.load(f)
            seed, ratio = stats.get("seed", seed), stats.get("ratio", ratio)
        split = SplitPair(
            train=load_prepared(train_path, normalizer=normalizer),
            test=load_prepared(test_path, normalizer=normalizer),
            seed=seed,
            ratio=ratio,
        )
        header = ReportHeader(
            dataset=str(data_dir),
            n_train=len(split.train),
            n_test=len(split.test),
            split_seed=seed,
            split_ratio=ratio,
            seeds=[],
        )
        return split, header

    logger.warning(f"No prepared split in {data_dir}; falling back to the bundled fixture corpus")
    split, _ = prepare_split(FIXTURE_CORPUS_PATH, DatasetSchema(), normalizer, ratio, seed)
    header = ReportHeader(
        dataset="bundled fixture corpus",
        substituted_fixture=True,
        n_train=len(split.train),
        n_test=len(split.test),
        split_seed=seed,
        split_ratio=ratio,
        seeds=[],
        notes=[f"published dataset not found in {data_dir}; bundled fixture corpus substituted"],
    )
    return split, header


def cmd_bench(args) -> int:
    start_time = datetime.now(timezone.utc)
    run_dir = Path(args.output_dir) / settings.run_timestamp()
    run_dir.mkdir(parents=True, exist_ok=True)
    log_file = run_dir / "bench.log"
    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(LOG_FILE_FORMAT))
    logging.getLogger().addHandler(file_handler)

    try:
        with WarningCollector() as collector:
            configs = load_config_file(args.config_set)
            slang_map = load_slang_map(args.slang_map)
            split, header = _bench_split(
                Path(args.data_dir), TextNormalizer(slang_map), configs[0].split_ratio, args.seed
            )
            seeds = sorted({seed for config in configs for seed in config.seeds})
            header = header.model_copy(update={"seeds": seeds})

            report = reproduce_table(
                configs,
                split,
                workers=args.workers,
                header=header,
                search_path=args.embeddings,
                slang_map=slang_map,
            )
            out_report = Path(args.out_report) if args.out_report else run_dir / "report.jsonl"
            files = write_report(report, out_report)
            sys.stdout.write(render_text(report))

        summary_path = write_run_summary(
            run_dir / "run_summary.json",
            report,
            start_time,
            datetime.now(timezone.utc),
            warnings=collector.warnings,
            errors=report.errors,
            files={**files, "log_file": log_file},
        )
        print(f"Run summary: {summary_path}")
    finally:
        logging.getLogger().removeHandler(file_handler)
        file_handler.close()
    return EXIT_OK


def _explain(classifier, tokens: Sequence[str]) -> str:
    weights = classifier.attention_weights(tokens)
    top = sorted(weights, key=lambda item: -item[1])[:EXPLAIN_TOP_K]
    return ",".join(f"{token}:{weight:.4f}" for token, weight in top)


def classify_lines(classifier, lines: Sequence[str], explain: bool = False) -> List[str]:
    """One output line per input line: `<probability>\\t<label>` or the skip marker."""
    normalizer = TextNormalizer(classifier.slang_map)
    output = []
    for line in lines:
        tokens = normalizer(line)
        if not tokens:
            output.append(SKIP_MARKER)
            continue
        probabilities, labels = classifier.predict([tokens])
        text = f"{float(probabilities[0]):.4f}\t{int(labels[0])}"
        if explain:
            text += "\t" + _explain(classifier, tokens)
        output.append(text)
    return output


def cmd_classify(args) -> int:
    classifier = load_classifier(args.model)
    lines = sys.stdin.read().splitlines() if args.stdin else args.text.splitlines() or [""]
    for text in classify_lines(classifier, lines, explain=args.explain):
        sys.stdout.write(text + "\n")
    return EXIT_OK


def cmd_inspect_embeddings(args) -> int:
    table = parse_embedding_file(resolve_embedding_path(args.embeddings))

    rows = [
        ("file", str(table.source or args.embeddings)),
        ("dimension", str(table.dim)),
        ("entries", str(len(table))),
        ("duplicate tokens", str(table.duplicate_count)),
    ]
    vocab = None
    if args.vocab:
        vocab = read_vocab(args.vocab)
    elif args.train_csv:
        vocab = build_vocab(load_prepared(args.train_csv).token_lists)
    if vocab is not None:
        rows.append(("vocabulary size", str(len(vocab))))
        rows.append(("coverage", f"{table.coverage(vocab.corpus_tokens):.4f}"))

    summary = Table(show_header=False)
    summary.add_column("Field", style="cyan")
    summary.add_column("Value")
    for field, value in rows:
        summary.add_row(field, value)
    Console().print(summary)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USER_ERROR

    configure_logging(args.log_level, args.log_file)
    try:
        return args.handler(args)
    except TrainingAbortedError as e:
        logger.error(f"Training aborted: {e}")
        return EXIT_INTERNAL_ERROR
    except DetectorError as e:
        logger.error(str(e))
        return EXIT_USER_ERROR
    except (FileNotFoundError, PermissionError) as e:
        logger.error(str(e))
        return EXIT_USER_ERROR
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
