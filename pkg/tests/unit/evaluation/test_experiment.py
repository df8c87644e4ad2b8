"""
Tests for per-seed experiments, aggregation and ladder reproduction.
"""
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from sexism_detector.corpus.splitter import stratified_split
from sexism_detector.evaluation.experiment import (
    aggregate_rows,
    evaluate_model,
    reproduce_table,
    run_experiment,
)
from sexism_detector.schema.config_schema import ExperimentConfig
from sexism_detector.schema.report_schema import ReportRow, TrainingSummary
from sexism_detector.utils.exceptions import MetricsError, ModelError, TrainingAbortedError

from tests.conftest import make_corpus


@pytest.fixture
def toy_split(toy_corpus):
    return stratified_split(toy_corpus, 0.75, 0)


def fake_classifier(predict_fn):
    classifier = MagicMock()
    classifier.predict.side_effect = lambda token_lists: (
        np.full(len(token_lists), 0.5),
        np.array([predict_fn(tokens) for tokens in token_lists]),
    )
    return classifier


def fake_trainer(predict_fn=lambda tokens: 1):
    trainer = MagicMock()
    trainer.train.return_value = (fake_classifier(predict_fn), TrainingSummary(epochs=3, vocab_size=10))
    return trainer


def metric_row(version, seed, value, status="ok"):
    config = ExperimentConfig(version=version)
    values = {} if status == "failed" else {"precision": value, "recall": value, "f1": value}
    return ReportRow(
        model=version, description=config.description, embedding=config.embedding.value,
        seed=seed, config_hash=config.config_hash(), status=status, **values,
    )


@pytest.mark.describe("evaluate_model tests")
class TestEvaluateModel:
    def test_counts_and_metrics(self):
        corpus = make_corpus([("a", 1), ("b", 1), ("c", 0), ("d", 0)])
        counts, (p, r, f1) = evaluate_model(fake_classifier(lambda t: int(t[0] in ("a", "c"))), corpus)
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == (1, 1, 1, 1)
        assert (p, r, f1) == (0.5, 0.5, 0.5)

    def test_empty_corpus(self):
        with pytest.raises(MetricsError, match="empty"):
            evaluate_model(fake_classifier(lambda t: 1), make_corpus([]))


@pytest.mark.describe("run_experiment tests")
class TestRunExperiment:
    def test_trains_once_per_seed(self, toy_split):
        config = ExperimentConfig(version="V3a", seeds=[1, 2, 3])
        trainer = fake_trainer()
        factory = MagicMock(return_value=trainer)

        result = run_experiment(config, toy_split, trainer_factory=factory, search_path="emb", slang_map={"u": "you"})

        factory.assert_called_once_with(config, search_path="emb", slang_map={"u": "you"})
        assert [c.args[2] for c in trainer.train.call_args_list] == [1, 2, 3]
        trainer.train.assert_called_with(toy_split.train.token_lists, toy_split.train.labels, 3)
        assert [row.seed for row in result.rows] == [1, 2, 3]
        assert all(row.epochs == 3 for row in result.rows)
        assert len(result.summaries) == 3
        assert not result.failed

    def test_metrics_of_always_positive_classifier(self, toy_split):
        config = ExperimentConfig(version="V3a", seeds=[0])
        result = run_experiment(config, toy_split, trainer_factory=MagicMock(return_value=fake_trainer()))
        row = result.rows[0]
        assert row.recall == 1.0
        assert row.precision == pytest.approx(0.5)
        assert row.predicted_positive_rate == 1.0
        assert row.config_hash == config.config_hash()

    def test_default_factory_is_create_trainer(self, toy_split):
        config = ExperimentConfig(version="V1a", seeds=[0])
        with patch("sexism_detector.evaluation.experiment.create_trainer", return_value=fake_trainer()) as mock_create:
            run_experiment(config, toy_split)
        mock_create.assert_called_once_with(config, search_path=None, slang_map=None)

    def test_training_abort_propagates(self, toy_split):
        trainer = MagicMock()
        trainer.train.side_effect = TrainingAbortedError("non-finite training loss nan", 1, 1)
        with pytest.raises(TrainingAbortedError):
            run_experiment(ExperimentConfig(version="V2"), toy_split, trainer_factory=MagicMock(return_value=trainer))

    def test_repeated_seed_gives_identical_rows(self, toy_split):
        config = ExperimentConfig(
            version="V3a", seeds=[11, 11], embedding_dim=4, hidden_size=3, epochs=2, batch_size=4, max_len=12
        )
        result = run_experiment(config, toy_split)
        first, second = result.rows
        assert (first.precision, first.recall, first.f1) == (second.precision, second.recall, second.f1)
        assert result.summaries[0].loss_history == result.summaries[1].loss_history


@pytest.mark.describe("aggregate_rows tests")
class TestAggregateRows:
    def test_mean_and_sample_std(self):
        config = ExperimentConfig(version="V4b")
        rows = [metric_row("V4b", s, v) for s, v in zip((1, 2, 3), (0.5, 0.7, 0.9))]
        aggregate = aggregate_rows(config, rows)
        assert aggregate.f1_mean == pytest.approx(0.7)
        assert aggregate.f1_std == pytest.approx(0.2)
        assert aggregate.n_seeds == 3
        assert aggregate.status == "ok"

    def test_single_seed_std_is_zero(self):
        aggregate = aggregate_rows(ExperimentConfig(version="V4b"), [metric_row("V4b", 1, 0.8)])
        assert aggregate.precision_std == 0.0

    def test_failed_rows_are_excluded(self):
        rows = [metric_row("V2", 1, 0.6), metric_row("V2", 2, None, status="failed")]
        aggregate = aggregate_rows(ExperimentConfig(version="V2"), rows)
        assert aggregate.n_seeds == 1
        assert aggregate.n_failed == 1
        assert aggregate.recall_mean == pytest.approx(0.6)

    def test_all_failed(self):
        rows = [metric_row("V2", 1, None, status="failed")]
        aggregate = aggregate_rows(ExperimentConfig(version="V2"), rows)
        assert aggregate.status == "failed"
        assert aggregate.f1_mean is None


@pytest.mark.describe("reproduce_table tests")
class TestReproduceTable:
    @staticmethod
    def factory(failing=()):
        def build(config, search_path=None, slang_map=None):
            if config.version in failing:
                raise ModelError(f"cannot build {config.version}")
            return fake_trainer(lambda tokens: int(len(tokens) % 2 == 0))
        return build

    def configs(self):
        return [ExperimentConfig(version=v, seeds=[1, 2]) for v in ("V4a", "V1b", "V3a", "V1a")]

    def test_results_follow_ladder_order(self, toy_split):
        report = reproduce_table(self.configs(), toy_split, trainer_factory=self.factory())
        assert [a.model for a in report.aggregates] == ["V1a", "V1b", "V3a", "V4a"]
        assert [r.model for r in report.rows] == ["V1a", "V1a", "V1b", "V1b", "V3a", "V3a", "V4a", "V4a"]
        assert report.errors == []

    def test_failure_is_reported_and_others_run(self, toy_split, caplog):
        report = reproduce_table(self.configs(), toy_split, trainer_factory=self.factory(failing=("V1b",)))
        failed = report.aggregate_for("V1b")
        assert failed.status == "failed"
        assert failed.n_failed == 2
        assert [r.status for r in report.rows if r.model == "V1b"] == ["failed", "failed"]
        assert all(r.error == "cannot build V1b" for r in report.rows if r.model == "V1b")
        assert report.errors == [("V1b", "cannot build V1b")]
        assert report.aggregate_for("V4a").status == "ok"
        assert "experiment failed" in caplog.text

    def test_worker_count_does_not_change_rows(self, toy_split):
        def metrics(report):
            return [(r.model, r.seed, r.precision, r.recall, r.f1, r.status) for r in report.rows]

        serial = reproduce_table(self.configs(), toy_split, trainer_factory=self.factory(failing=("V3a",)))
        threaded = reproduce_table(
            self.configs(), toy_split, workers=3, trainer_factory=self.factory(failing=("V3a",))
        )
        assert metrics(threaded) == metrics(serial)
        assert threaded.errors == serial.errors

    def test_aggregate_for_unknown_version(self, toy_split):
        report = reproduce_table(self.configs()[:1], toy_split, trainer_factory=self.factory())
        assert report.aggregate_for("V2") is None
