"""
Tests for the batched forward pass, exact backpropagation and prediction.
"""
import numpy as np
import pytest

from sexism_detector.embeddings.vocabulary import PAD_INDEX
from sexism_detector.nn.layers import bce_loss
from sexism_detector.nn.model import attention_weights, backward, forward, loss_and_gradients, predict
from sexism_detector.nn.params import ModelParams, init_params
from sexism_detector.schema.config_schema import ModelFamily
from sexism_detector.utils.exceptions import ModelError

NEURAL_FAMILIES = [ModelFamily.LSTM, ModelFamily.BILSTM, ModelFamily.BILSTM_ATTENTION]

IDS = np.array([[2, 3, 4, 5], [5, 1, 0, 0], [3, 0, 0, 0]])
LENGTHS = np.array([4, 2, 1])
LABELS = np.array([1.0, 0.0, 1.0])


def tiny_params(family, seed=0, dropout_rate=0.0):
    rng = np.random.default_rng(seed + 100)
    embedding = rng.uniform(-0.5, 0.5, size=(6, 3))
    embedding[PAD_INDEX] = 0.0
    return init_params(family, embedding, hidden_size=2, attention_size=3, dropout_rate=dropout_rate, seed=seed)


def batch_loss(params):
    return float(np.mean(bce_loss(forward(params, IDS, LENGTHS).probabilities, LABELS)))


def numeric_gradients(params, eps=1e-5):
    numeric = {}
    for name, tensor in params.named_tensors().items():
        grad = np.zeros_like(tensor)
        for idx in np.ndindex(tensor.shape):
            original = tensor[idx]
            tensor[idx] = original + eps
            plus = batch_loss(params)
            tensor[idx] = original - eps
            minus = batch_loss(params)
            tensor[idx] = original
            grad[idx] = (plus - minus) / (2 * eps)
        numeric[name] = grad
    return numeric


@pytest.mark.describe("backward gradient check")
class TestGradientCheck:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("family", NEURAL_FAMILIES, ids=lambda f: f.value)
    def test_matches_central_differences(self, family, seed):
        params = tiny_params(family, seed)
        _, analytic, _ = loss_and_gradients(params, IDS, LENGTHS, LABELS)
        numeric = numeric_gradients(params)

        assert set(analytic) == set(numeric)
        for name in numeric:
            a, n = analytic[name], numeric[name]
            rel = np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-7)
            assert rel < 1e-4, f"{family.value} seed {seed}: {name} relative error {rel:.2e}"

    @pytest.mark.parametrize("family", NEURAL_FAMILIES, ids=lambda f: f.value)
    def test_perfect_predictions_give_zero_gradients(self, family):
        params = tiny_params(family, seed=2)
        trace = forward(params, IDS, LENGTHS)
        grads = backward(trace, trace.probabilities.copy(), params)
        for name, grad in grads.items():
            np.testing.assert_array_equal(grad, 0.0, err_msg=name)

    def test_gradient_keys_match_tensors(self):
        params = tiny_params(ModelFamily.BILSTM_ATTENTION)
        _, grads, _ = loss_and_gradients(params, IDS, LENGTHS, LABELS)
        assert list(grads) == list(params.named_tensors())
        for name, value in params.named_tensors().items():
            assert grads[name].shape == value.shape

    @pytest.mark.parametrize("family", NEURAL_FAMILIES, ids=lambda f: f.value)
    def test_padding_row_gradient_is_zero(self, family):
        _, grads, _ = loss_and_gradients(tiny_params(family), IDS, LENGTHS, LABELS)
        np.testing.assert_array_equal(grads["embedding"][PAD_INDEX], 0.0)
        assert np.any(grads["embedding"][2] != 0.0)

    def test_untouched_rows_have_zero_gradient(self):
        ids = np.array([[2, 3, 0]])
        _, grads, _ = loss_and_gradients(tiny_params(ModelFamily.BILSTM), ids, np.array([2]), np.array([1.0]))
        np.testing.assert_array_equal(grads["embedding"][[1, 4, 5]], 0.0)


@pytest.mark.describe("forward pass invariants")
class TestForward:
    @pytest.mark.parametrize("family", NEURAL_FAMILIES, ids=lambda f: f.value)
    def test_padding_extension_invariance(self, family):
        params = tiny_params(family, seed=2)
        short = forward(params, IDS, LENGTHS).probabilities
        extended = forward(params, np.pad(IDS, ((0, 0), (0, 5))), LENGTHS).probabilities
        np.testing.assert_allclose(extended, short, atol=1e-9)

    def test_attention_weights_sum_to_one_and_skip_padding(self):
        trace = forward(tiny_params(ModelFamily.BILSTM_ATTENTION, seed=1), IDS, LENGTHS)
        weights = trace.attention_weights
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(weights[~trace.mask], 0.0)

    def test_no_attention_weights_without_attention(self):
        assert forward(tiny_params(ModelFamily.BILSTM), IDS, LENGTHS).attention_weights is None

    def test_dropout_needs_generator(self):
        params = tiny_params(ModelFamily.LSTM, dropout_rate=0.5)
        with pytest.raises(ModelError, match="dropout generator"):
            forward(params, IDS, LENGTHS, training=True)

    def test_training_dropout_changes_output_eval_does_not(self):
        params = tiny_params(ModelFamily.LSTM, dropout_rate=0.5)
        clean = forward(params, IDS, LENGTHS).probabilities
        np.testing.assert_array_equal(forward(params, IDS, LENGTHS).probabilities, clean)
        noisy = forward(params, IDS, LENGTHS, training=True, rng=np.random.default_rng(0))
        assert set(noisy.dropout_masks) == {"between", "pooled"}
        assert not np.allclose(noisy.probabilities, clean)

    def test_backward_rejects_foreign_trace(self):
        trace = forward(tiny_params(ModelFamily.BILSTM), IDS, LENGTHS)
        with pytest.raises(ModelError):
            backward(trace, LABELS, tiny_params(ModelFamily.LSTM))
        with pytest.raises(ModelError):
            backward(trace, LABELS[:2], tiny_params(ModelFamily.BILSTM))


@pytest.mark.describe("predict tests")
class TestPredict:
    def test_labels_follow_threshold(self):
        probabilities, labels = predict(tiny_params(ModelFamily.BILSTM, seed=3), IDS, LENGTHS)
        assert labels.tolist() == [int(p >= 0.5) for p in probabilities]

    def test_single_sequence_returns_scalars(self):
        params = tiny_params(ModelFamily.LSTM)
        probability, label = predict(params, np.array([2, 3, 0]), 2)
        assert isinstance(probability, float)
        assert isinstance(label, int)
        assert 0.0 <= probability <= 1.0

    def test_chunking_does_not_change_results(self):
        params = tiny_params(ModelFamily.BILSTM_ATTENTION, seed=4)
        whole, _ = predict(params, IDS, LENGTHS)
        chunked, _ = predict(params, IDS, LENGTHS, batch_size=1)
        np.testing.assert_allclose(chunked, whole, atol=1e-12)

    def test_empty_sequence_errors(self):
        with pytest.raises(ModelError, match="empty sequence"):
            predict(tiny_params(ModelFamily.LSTM), np.array([[2, 0], [0, 0]]), np.array([1, 0]))

    def test_attention_weights_over_valid_tokens(self):
        weights = attention_weights(tiny_params(ModelFamily.BILSTM_ATTENTION), np.array([2, 3, 4, 0, 0]), 3)
        assert weights.shape == (3,)
        assert abs(weights.sum() - 1.0) < 1e-12

    def test_attention_weights_need_attention_model(self):
        with pytest.raises(ModelError, match="no attention layer"):
            attention_weights(tiny_params(ModelFamily.LSTM), np.array([2, 3]), 2)


@pytest.mark.describe("ModelParams tests")
class TestModelParams:
    def test_named_tensor_round_trip(self):
        params = tiny_params(ModelFamily.BILSTM_ATTENTION)
        rebuilt = ModelParams.from_named_tensors(params.family, params.named_tensors(), dropout_rate=0.0)
        for name, value in params.named_tensors().items():
            np.testing.assert_array_equal(rebuilt.named_tensors()[name], value)

    def test_missing_tensor(self):
        tensors = tiny_params(ModelFamily.BILSTM).named_tensors()
        del tensors["bwd.U_g"]
        with pytest.raises(ModelError, match="bwd.U_g"):
            ModelParams.from_named_tensors(ModelFamily.BILSTM, tensors)

    def test_baseline_family_rejected(self):
        with pytest.raises(ModelError):
            init_params(ModelFamily.LOGREG, np.zeros((3, 2)), hidden_size=2)

    def test_frozen_embedding_not_trainable(self):
        params = init_params(ModelFamily.BILSTM, np.zeros((3, 2)), hidden_size=2, trainable_embeddings=False)
        assert "embedding" not in params.trainable_names()
        assert "dense.W" in params.trainable_names()

    def test_forget_bias_starts_at_one(self):
        params = tiny_params(ModelFamily.LSTM)
        np.testing.assert_array_equal(params.recurrent["lstm1"].b_f, 1.0)
        np.testing.assert_array_equal(params.recurrent["lstm1"].b_i, 0.0)

    def test_init_is_seeded(self):
        a = tiny_params(ModelFamily.BILSTM, seed=9).named_tensors()
        b = tiny_params(ModelFamily.BILSTM, seed=9).named_tensors()
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])
