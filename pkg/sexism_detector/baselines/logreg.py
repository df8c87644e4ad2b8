"""
L2-regularised logistic regression trained by full-batch gradient descent.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import expit

from sexism_detector.nn.layers import bce_loss
from sexism_detector.utils.exceptions import ModelError

logger = logging.getLogger(__name__)


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    loss_history: List[float] = field(default_factory=list)

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features, dtype=np.float64) @ self.weights + self.bias

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(features))


def _objective(features, labels, weights, bias, l2) -> float:
    p = expit(features @ weights + bias)
    return float(np.mean(bce_loss(p, labels)) + 0.5 * l2 * np.dot(weights, weights))


def logreg_fit(
    features: np.ndarray,
    labels: np.ndarray,
    l2: float = 1e-4,
    lr: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
) -> LogRegModel:
    """
    Minimise mean BCE + (l2 / 2) * ||w||^2 from a zero start.

    Every epoch is one full-batch gradient step; the objective after each
    step is recorded. The result depends only on the data and the
    hyperparameters; `seed` is accepted so every ladder trainer has the
    same signature.

    Raises:
        ModelError: Empty training set or negative l2
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ModelError("Cannot fit logistic regression on an empty training set")
    if labels.shape != (features.shape[0],):
        raise ModelError(f"Got {labels.shape[0]} labels for {features.shape[0]} examples")
    if l2 < 0:
        raise ModelError(f"l2 must be non-negative, got {l2}")

    n = features.shape[0]
    weights = np.zeros(features.shape[1])
    bias = 0.0
    history = []
    for _ in range(epochs):
        residual = expit(features @ weights + bias) - labels
        grad_w = features.T @ residual / n + l2 * weights
        grad_b = residual.mean()
        weights = weights - lr * grad_w
        bias = bias - lr * grad_b
        history.append(_objective(features, labels, weights, bias, l2))

    if history:
        logger.info(f"Logistic regression: {epochs} epochs, final objective {history[-1]:.6f}")
    return LogRegModel(weights=weights, bias=float(bias), loss_history=history)
