"""
Adam optimizer over named parameter tensors.
"""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from sexism_detector.utils.exceptions import ModelError


@dataclass(frozen=True)
class AdamState:
    """First/second moment estimates per tensor name and the step count."""

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """
    One bias-corrected Adam update.

        m <- b1 m + (1 - b1) g
        v <- b2 v + (1 - b2) g^2
        p <- p - lr * m_hat / (sqrt(v_hat) + eps)

    Inputs are not modified.

    Args:
        params: Tensors to update, by name
        grads: Gradients with the same names and shapes
        state: Moments from the previous step
        lr, beta1, beta2, eps: Adam hyperparameters

    Returns:
        (updated tensors, new state)

    Raises:
        ModelError: If a gradient is missing or has the wrong shape
    """
    step = state.step + 1
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step

    updated: Dict[str, np.ndarray] = {}
    m_new: Dict[str, np.ndarray] = {}
    v_new: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        grad = grads.get(name)
        if grad is None or grad.shape != value.shape:
            raise ModelError(f"Gradient for {name} is missing or has the wrong shape")
        m = beta1 * state.m.get(name, 0.0) + (1.0 - beta1) * grad
        v = beta2 * state.v.get(name, 0.0) + (1.0 - beta2) * (grad * grad)
        updated[name] = value - lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
        m_new[name], v_new[name] = m, v

    return updated, AdamState(step=step, m=m_new, v=v_new)
