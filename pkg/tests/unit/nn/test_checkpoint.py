"""
Tests for the JSON checkpoint container and the neural classifier.
"""
import json

import numpy as np
import pytest

from sexism_detector.embeddings.loader import EmbeddingLoader
from sexism_detector.embeddings.vocabulary import build_vocab
from sexism_detector.nn.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from sexism_detector.nn.classifier import NeuralClassifier
from sexism_detector.nn.trainer import NeuralTrainer
from sexism_detector.schema.config_schema import ExperimentConfig
from sexism_detector.utils.exceptions import CheckpointError, ModelError


def train_classifier(version, token_lists, labels):
    config = ExperimentConfig(
        version=version, embedding_dim=6, hidden_size=3, attention_size=3, max_len=12, epochs=2, batch_size=8
    )
    classifier, _ = NeuralTrainer(config, EmbeddingLoader(), slang_map={"u": "you"}).train(token_lists, labels, seed=1)
    return classifier


@pytest.fixture
def attention_classifier(toy_token_lists, toy_labels):
    return train_classifier("V4a", toy_token_lists, toy_labels)


@pytest.mark.describe("Checkpoint container tests")
class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        checkpoint = Checkpoint(
            kind="logreg",
            config={"version": "V1a"},
            vocabulary=build_vocab([("a", "b")]),
            tensors={"weights": rng.normal(size=(3, 2)) / 7.0},
            extra={"note": "x"},
        )
        path = save_checkpoint(checkpoint, tmp_path / "nested" / "model.json")
        loaded = load_checkpoint(path)
        assert loaded.kind == "logreg"
        assert loaded.vocabulary == checkpoint.vocabulary
        assert loaded.extra == {"note": "x"}
        assert np.array_equal(loaded.tensors["weights"], checkpoint.tensors["weights"])

    def test_vocabulary_hash_mismatch(self, tmp_path):
        checkpoint = Checkpoint(kind="neural", config={}, vocabulary=build_vocab([("a",)]))
        path = save_checkpoint(checkpoint, tmp_path / "model.json")
        document = json.loads(path.read_text(encoding="utf-8"))
        document["vocabulary"]["sha256"] = "0" * 64
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(CheckpointError, match="hash mismatch"):
            load_checkpoint(path)

    def test_reordered_vocabulary_detected(self, tmp_path):
        checkpoint = Checkpoint(kind="neural", config={}, vocabulary=build_vocab([("a", "b", "b")]))
        path = save_checkpoint(checkpoint, tmp_path / "model.json")
        document = json.loads(path.read_text(encoding="utf-8"))
        tokens = document["vocabulary"]["tokens"]
        tokens[2], tokens[3] = tokens[3], tokens[2]
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError, match="not found"):
            load_checkpoint(tmp_path / "absent.json")

    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(CheckpointError, match="not valid JSON"):
            load_checkpoint(path)

    def test_foreign_format_and_version(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"format": "other"}), encoding="utf-8")
        with pytest.raises(CheckpointError, match="is not a"):
            load_checkpoint(path)
        path.write_text(json.dumps({"format": "sexism-detector-checkpoint", "version": 99}), encoding="utf-8")
        with pytest.raises(CheckpointError, match="Unsupported checkpoint version"):
            load_checkpoint(path)

    def test_expected_kind(self, tmp_path):
        path = save_checkpoint(Checkpoint(kind="gbdt", config={}, vocabulary=build_vocab([("a",)])), tmp_path / "m.json")
        with pytest.raises(CheckpointError, match="kind"):
            load_checkpoint(path, expected_kind="neural")

    def test_save_rejects_non_finite_and_unknown_kind(self, tmp_path):
        vocab = build_vocab([("a",)])
        with pytest.raises(CheckpointError, match="non-finite"):
            save_checkpoint(Checkpoint(kind="neural", config={}, vocabulary=vocab, tensors={"w": np.array([np.nan])}), tmp_path / "a.json")
        with pytest.raises(CheckpointError, match="Unknown checkpoint kind"):
            save_checkpoint(Checkpoint(kind="svm", config={}, vocabulary=vocab), tmp_path / "b.json")


@pytest.mark.describe("NeuralClassifier tests")
class TestNeuralClassifier:
    def test_save_and_load_predicts_identically(self, attention_classifier, toy_token_lists, tmp_path):
        path = tmp_path / "v4a.json"
        attention_classifier.save(path)
        loaded = NeuralClassifier.from_checkpoint(str(path))
        assert loaded.version == "V4a"
        assert loaded.slang_map == {"u": "you"}
        assert loaded.config == attention_classifier.config
        np.testing.assert_array_equal(
            loaded.predict_proba(toy_token_lists), attention_classifier.predict_proba(toy_token_lists)
        )

    def test_predict_returns_labels(self, attention_classifier, toy_token_lists):
        probabilities, labels = attention_classifier.predict(toy_token_lists)
        assert probabilities.shape == (16,)
        assert labels.tolist() == [int(p >= 0.5) for p in probabilities]

    def test_unknown_tokens_still_predict(self, attention_classifier):
        probabilities = attention_classifier.predict_proba([("completely", "unseen", "words")])
        assert 0.0 <= probabilities[0] <= 1.0

    def test_attention_weights_per_token(self, attention_classifier):
        tokens = ("women", "are", "too", "emotional")
        pairs = attention_classifier.attention_weights(tokens)
        assert [token for token, _ in pairs] == list(tokens)
        assert abs(sum(w for _, w in pairs) - 1.0) < 1e-9

    def test_attention_weights_need_attention_model(self, toy_token_lists, toy_labels):
        classifier = train_classifier("V3a", toy_token_lists, toy_labels)
        with pytest.raises(ModelError, match="no attention layer"):
            classifier.attention_weights(("women", "are"))

    def test_wrong_kind_checkpoint_rejected(self, tmp_path):
        path = save_checkpoint(Checkpoint(kind="logreg", config={}, vocabulary=build_vocab([("a",)])), tmp_path / "m.json")
        with pytest.raises(CheckpointError):
            NeuralClassifier.from_checkpoint(str(path))

    def test_invalid_config_in_checkpoint(self, attention_classifier):
        checkpoint = attention_classifier.to_checkpoint()
        checkpoint.config = {**checkpoint.config, "hidden_size": -1}
        with pytest.raises(CheckpointError, match="valid neural model"):
            NeuralClassifier.from_checkpoint(checkpoint)

    def test_embedding_rows_must_match_vocabulary(self, attention_classifier):
        with pytest.raises(ModelError):
            NeuralClassifier(
                params=attention_classifier.params,
                vocab=build_vocab([("a",)]),
                config=attention_classifier.config,
            )
