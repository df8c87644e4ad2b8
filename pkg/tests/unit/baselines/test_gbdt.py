"""
Tests for the gradient-boosted tree baseline.
"""
import json

import numpy as np
import pytest

from sexism_detector.baselines.gbdt import GbdtModel, TreeNode, gbdt_fit, gbdt_predict
from sexism_detector.utils.exceptions import ConfigurationError, ModelError

GAP_FEATURES = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
GAP_LABELS = np.array([0, 0, 0, 1, 1, 1])

XOR_FEATURES = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_LABELS = np.array([0, 1, 1, 0])


@pytest.mark.describe("gbdt_fit tests")
class TestGbdtFit:
    def test_stump_threshold_lies_in_gap(self):
        model = gbdt_fit(GAP_FEATURES, GAP_LABELS, n_trees=1, max_depth=1)
        root = model.trees[0]
        assert root.feature == 0
        assert 3.0 < root.threshold < 10.0
        assert root.left.value < 0 < root.right.value

    def test_constant_labels(self):
        model = gbdt_fit(GAP_FEATURES, np.ones(6), n_trees=5)
        assert all(np.all(np.isfinite(tree.leaf_values())) for tree in model.trees)
        assert all(tree.is_leaf for tree in model.trees)
        assert np.all(model.predict_proba(GAP_FEATURES) > 0.99)

    def test_xor_needs_depth_two(self):
        model = gbdt_fit(XOR_FEATURES, XOR_LABELS, n_trees=50, max_depth=2)
        predictions = (model.predict_proba(XOR_FEATURES) >= 0.5).astype(int)
        assert np.mean(predictions == XOR_LABELS) == 1.0
        assert all(tree.depth() <= 2 for tree in model.trees)

    def test_training_loss_never_increases(self):
        model = gbdt_fit(GAP_FEATURES, GAP_LABELS, n_trees=30, max_depth=2)
        history = model.loss_history
        assert len(history) == 30
        assert all(later <= earlier + 1e-12 for earlier, later in zip(history, history[1:]))

    def test_prior_is_label_log_odds(self):
        model = gbdt_fit(XOR_FEATURES, np.array([1, 1, 1, 0]), n_trees=1)
        assert model.base_score == pytest.approx(np.log(3.0))

    def test_seed_does_not_change_trees(self):
        a = gbdt_fit(XOR_FEATURES, XOR_LABELS, n_trees=3, max_depth=2, seed=1)
        b = gbdt_fit(XOR_FEATURES, XOR_LABELS, n_trees=3, max_depth=2, seed=9)
        assert a.to_record() == b.to_record()

    @pytest.mark.parametrize(
        "kwargs",
        [{"n_trees": 0}, {"max_depth": 0}, {"learning_rate": 0.0}],
    )
    def test_invalid_hyperparameters(self, kwargs):
        with pytest.raises(ConfigurationError):
            gbdt_fit(GAP_FEATURES, GAP_LABELS, **kwargs)

    def test_empty_training_set(self):
        with pytest.raises(ModelError, match="empty"):
            gbdt_fit(np.zeros((0, 2)), np.zeros(0))


@pytest.mark.describe("GbdtModel tests")
class TestGbdtModel:
    def test_record_survives_json(self):
        model = gbdt_fit(XOR_FEATURES, XOR_LABELS, n_trees=10, max_depth=2)
        restored = GbdtModel.from_record(json.loads(json.dumps(model.to_record())))
        np.testing.assert_array_equal(restored.predict_proba(XOR_FEATURES), model.predict_proba(XOR_FEATURES))

    def test_tree_deeper_than_max_depth_rejected(self):
        leaf = TreeNode(value=0.0)
        stump = TreeNode(feature=0, threshold=0.5, left=leaf, right=leaf)
        deep = TreeNode(feature=0, threshold=0.5, left=stump, right=leaf)
        with pytest.raises(ModelError, match="depth"):
            GbdtModel(trees=[deep], learning_rate=0.1, base_score=0.0, max_depth=1)

    def test_non_finite_leaf_rejected(self):
        with pytest.raises(ModelError, match="non-finite"):
            GbdtModel(trees=[TreeNode(value=float("inf"))], learning_rate=0.1, base_score=0.0, max_depth=1)

    def test_predict_routes_by_threshold(self):
        stump = TreeNode(feature=1, threshold=0.5, left=TreeNode(value=-1.0), right=TreeNode(value=1.0))
        np.testing.assert_array_equal(stump.predict(np.array([[9.0, 0.5], [9.0, 0.6]])), [-1.0, 1.0])

    def test_gbdt_predict_scalar_for_vector(self):
        model = gbdt_fit(GAP_FEATURES, GAP_LABELS, n_trees=20, max_depth=1)
        assert isinstance(gbdt_predict(model, np.array([11.5])), float)
        assert gbdt_predict(model, np.array([11.5])) > 0.5
        assert gbdt_predict(model, GAP_FEATURES).shape == (6,)
