"""
Gradient-boosted regression trees for binary classification (logistic loss).
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit, logit

from sexism_detector.nn.layers import bce_loss
from sexism_detector.utils.exceptions import ConfigurationError, ModelError

logger = logging.getLogger(__name__)

LEAF_DENOMINATOR_FLOOR = 1e-9
BASE_SCORE_CLAMP = 1e-15


@dataclass(frozen=True)
class TreeNode:
    """Leaf (value set) or axis-aligned split: x[feature] <= threshold goes left."""

    value: Optional[float] = None
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def leaf_values(self) -> List[float]:
        if self.is_leaf:
            return [self.value]
        return self.left.leaf_values() + self.right.leaf_values()

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(features)
        out = np.empty(features.shape[0])
        self._fill(features, np.arange(features.shape[0]), out)
        return out

    def _fill(self, features: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
        if self.is_leaf:
            out[rows] = self.value
            return
        goes_left = features[rows, self.feature] <= self.threshold
        self.left._fill(features, rows[goes_left], out)
        self.right._fill(features, rows[~goes_left], out)

    def to_record(self) -> Dict[str, Any]:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_record(),
            "right": self.right.to_record(),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "TreeNode":
        if "value" in record:
            return cls(value=float(record["value"]))
        return cls(
            feature=int(record["feature"]),
            threshold=float(record["threshold"]),
            left=cls.from_record(record["left"]),
            right=cls.from_record(record["right"]),
        )


@dataclass
class GbdtModel:
    """base_score is a log-odds prior; tree outputs are scaled by learning_rate."""

    trees: List[TreeNode]
    learning_rate: float
    base_score: float
    max_depth: int
    loss_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        for idx, tree in enumerate(self.trees):
            if tree.depth() > self.max_depth:
                raise ModelError(f"Tree {idx} has depth {tree.depth()} > max_depth {self.max_depth}")
            if not np.all(np.isfinite(tree.leaf_values())):
                raise ModelError(f"Tree {idx} has non-finite leaf values")

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        score = np.full(features.shape[0], self.base_score)
        for tree in self.trees:
            score += self.learning_rate * tree.predict(features)
        return score

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(features))

    def to_record(self) -> Dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "base_score": self.base_score,
            "max_depth": self.max_depth,
            "trees": [tree.to_record() for tree in self.trees],
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "GbdtModel":
        return cls(
            trees=[TreeNode.from_record(t) for t in record["trees"]],
            learning_rate=float(record["learning_rate"]),
            base_score=float(record["base_score"]),
            max_depth=int(record["max_depth"]),
        )


def _best_split(features: np.ndarray, residuals: np.ndarray) -> Optional[Tuple[int, float]]:
    """
    Greedy variance-reduction split over all features.

    Candidate thresholds are midpoints between consecutive distinct values;
    exact ties go to the lowest feature, then the lowest threshold.
    """
    n = residuals.shape[0]
    total, total_sq = residuals.sum(), np.dot(residuals, residuals)
    parent_sse = total_sq - total * total / n
    n_left = np.arange(1, n)

    best: Optional[Tuple[float, int, float]] = None
    for feature in range(features.shape[1]):
        order = np.argsort(features[:, feature], kind="stable")
        values = features[order, feature]
        sorted_res = residuals[order]
        distinct = values[1:] > values[:-1]
        if not distinct.any():
            continue
        left_sum = np.cumsum(sorted_res)[:-1]
        left_sq = np.cumsum(sorted_res * sorted_res)[:-1]
        left_sse = left_sq - left_sum ** 2 / n_left
        right_sse = (total_sq - left_sq) - (total - left_sum) ** 2 / (n - n_left)
        gain = np.where(distinct, parent_sse - left_sse - right_sse, -np.inf)
        k = int(np.argmax(gain))
        if best is None or gain[k] > best[0]:
            threshold = (values[k] + values[k + 1]) / 2.0
            if threshold >= values[k + 1]:
                threshold = values[k]
            best = (float(gain[k]), feature, float(threshold))

    return None if best is None else (best[1], best[2])


def _grow(
    features: np.ndarray,
    residuals: np.ndarray,
    hessians: np.ndarray,
    depth: int,
    max_depth: int,
) -> TreeNode:
    if depth >= max_depth or residuals.shape[0] < 2 or np.ptp(residuals) == 0.0:
        return TreeNode(value=float(residuals.sum() / max(hessians.sum(), LEAF_DENOMINATOR_FLOOR)))

    split = _best_split(features, residuals)
    if split is None:
        return TreeNode(value=float(residuals.sum() / max(hessians.sum(), LEAF_DENOMINATOR_FLOOR)))

    feature, threshold = split
    goes_left = features[:, feature] <= threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_grow(features[goes_left], residuals[goes_left], hessians[goes_left], depth + 1, max_depth),
        right=_grow(features[~goes_left], residuals[~goes_left], hessians[~goes_left], depth + 1, max_depth),
    )


def gbdt_fit(
    features: np.ndarray,
    labels: np.ndarray,
    n_trees: int = 200,
    max_depth: int = 3,
    learning_rate: float = 0.1,
    seed: int = 0,
) -> GbdtModel:
    """
    Stagewise fit of regression trees to the residuals y - p of the logistic loss.

    Leaves hold the Newton step sum(r) / max(sum(p (1 - p)), 1e-9). Nodes stop
    splitting at max_depth, below two samples, or when their residuals are
    constant. Every candidate is scanned, so `seed` does not change the result;
    it is accepted for the common trainer signature.

    Args:
        features: (n, d) feature matrix
        labels: (n,) labels in {0, 1}
        n_trees: Number of boosting rounds (>= 1)
        max_depth: Maximum tree depth (>= 1)
        learning_rate: Shrinkage applied to every tree

    Returns:
        GbdtModel with the training loss after every tree

    Raises:
        ConfigurationError: n_trees < 1, max_depth < 1 or learning_rate <= 0
        ModelError: Empty or inconsistent training data
    """
    if n_trees < 1:
        raise ConfigurationError(f"n_trees must be >= 1, got {n_trees}")
    if max_depth < 1:
        raise ConfigurationError(f"max_depth must be >= 1, got {max_depth}")
    if learning_rate <= 0:
        raise ConfigurationError(f"learning_rate must be positive, got {learning_rate}")
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ModelError("Cannot fit GBDT on an empty training set")
    if labels.shape != (features.shape[0],):
        raise ModelError(f"Got {labels.shape[0]} labels for {features.shape[0]} examples")

    prior = float(np.clip(labels.mean(), BASE_SCORE_CLAMP, 1.0 - BASE_SCORE_CLAMP))
    base_score = float(logit(prior))
    score = np.full(labels.shape[0], base_score)

    trees: List[TreeNode] = []
    history: List[float] = []
    for _ in range(n_trees):
        p = expit(score)
        tree = _grow(features, labels - p, p * (1.0 - p), depth=0, max_depth=max_depth)
        trees.append(tree)
        score = score + learning_rate * tree.predict(features)
        history.append(float(np.mean(bce_loss(expit(score), labels))))

    logger.info(f"GBDT: {n_trees} trees (depth <= {max_depth}), final training loss {history[-1]:.6f}")
    return GbdtModel(
        trees=trees,
        learning_rate=learning_rate,
        base_score=base_score,
        max_depth=max_depth,
        loss_history=history,
    )


def gbdt_predict(model: GbdtModel, feature: np.ndarray):
    """
    sigmoid(base_score + learning_rate * sum of tree outputs).

    Returns a float for one feature vector, an array for a matrix.
    """
    feature = np.asarray(feature, dtype=np.float64)
    probabilities = model.predict_proba(feature)
    return float(probabilities[0]) if feature.ndim == 1 else probabilities
