"""
Forward pass, backpropagation and prediction for the V2/V3/V4 architectures.

    V2: embedding -> LSTM -> dropout -> LSTM -> final state -> dropout -> dense
    V3: embedding -> BiLSTM -> [final fwd ; final bwd] -> dropout -> dense
    V4: embedding -> BiLSTM states -> attention -> dropout -> dense
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from sexism_detector.embeddings.vocabulary import PAD_INDEX
from sexism_detector.nn.layers import (
    AttentionCache,
    LstmCache,
    as_batch,
    attention_backward,
    attention_pool,
    bce_logit_gradient,
    bce_loss,
    dense_logit,
    dropout_mask,
    gather_time,
    lstm_sequence_backward,
    lstm_sequence_forward,
    reverse_valid_prefix_index,
    sequence_mask,
)
from sexism_detector.nn.params import ModelParams
from sexism_detector.schema.config_schema import ModelFamily
from sexism_detector.utils.exceptions import ModelError

DECISION_THRESHOLD = 0.5


@dataclass
class ForwardTrace:
    """Activations of one batched forward pass, kept for backward()."""

    family: ModelFamily
    ids: np.ndarray
    lengths: np.ndarray
    mask: np.ndarray
    layers: Dict[str, LstmCache]
    pooled: np.ndarray
    dense_input: np.ndarray
    logits: np.ndarray
    probabilities: np.ndarray
    reverse_index: Optional[np.ndarray] = None
    attention: Optional[AttentionCache] = None
    dropout_masks: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def attention_weights(self) -> Optional[np.ndarray]:
        return None if self.attention is None else self.attention.weights


def _apply_mask(x: np.ndarray, masks: Dict[str, np.ndarray], name: str) -> np.ndarray:
    return x * masks[name] if name in masks else x


def forward(
    params: ModelParams,
    ids: np.ndarray,
    lengths: np.ndarray,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> ForwardTrace:
    """
    Batched forward pass.

    Args:
        params: Model parameters
        ids: (batch, time) token indices
        lengths: (batch,) valid lengths, each >= 1
        training: Apply dropout (needs `rng` when the rate is positive)
        rng: Dropout mask generator

    Returns:
        ForwardTrace

    Raises:
        ModelError: Empty sequence or missing generator
    """
    ids, lengths, _ = as_batch(np.atleast_2d(ids), np.atleast_1d(lengths))
    steps = ids.shape[1]
    mask = sequence_mask(lengths, steps)
    inputs = params.embedding[ids]

    rate = params.dropout_rate if training else 0.0
    if rate > 0.0 and rng is None:
        raise ModelError("Training-mode forward pass needs a dropout generator")
    masks: Dict[str, np.ndarray] = {}
    layers: Dict[str, LstmCache] = {}
    reverse_index = None
    attention = None

    if params.family == ModelFamily.LSTM:
        first, _, layers["lstm1"] = lstm_sequence_forward(inputs, mask, params.recurrent["lstm1"])
        if rate > 0.0:
            masks["between"] = dropout_mask(first.shape, rate, rng)
        _, pooled, layers["lstm2"] = lstm_sequence_forward(
            _apply_mask(first, masks, "between"), mask, params.recurrent["lstm2"]
        )
    else:
        reverse_index = reverse_valid_prefix_index(lengths, steps)
        out_fwd, final_fwd, layers["fwd"] = lstm_sequence_forward(inputs, mask, params.recurrent["fwd"])
        out_rev, final_bwd, layers["bwd"] = lstm_sequence_forward(
            gather_time(inputs, reverse_index), mask, params.recurrent["bwd"]
        )
        if params.family == ModelFamily.BILSTM_ATTENTION:
            states = np.concatenate([out_fwd, gather_time(out_rev, reverse_index)], axis=-1)
            pooled, _, attention = attention_pool(states, mask, params.attention)
        else:
            pooled = np.concatenate([final_fwd, final_bwd], axis=-1)

    if rate > 0.0:
        masks["pooled"] = dropout_mask(pooled.shape, rate, rng)
    dense_input = _apply_mask(pooled, masks, "pooled")
    logits = dense_logit(dense_input, params.dense_W, params.dense_b)

    return ForwardTrace(
        family=params.family,
        ids=ids,
        lengths=lengths,
        mask=mask,
        layers=layers,
        pooled=pooled,
        dense_input=dense_input,
        logits=logits,
        probabilities=expit(logits),
        reverse_index=reverse_index,
        attention=attention,
        dropout_masks=masks,
    )


def backward(trace: ForwardTrace, y: np.ndarray, params: ModelParams) -> Dict[str, np.ndarray]:
    """
    Exact gradients of the batch-mean BCE loss w.r.t. every named tensor.

    The padding row of the embedding gradient is always zero; rows not
    touched by the batch are zero too.

    Args:
        trace: Trace of the forward pass that produced the loss
        y: (batch,) labels
        params: The parameters used in that forward pass

    Returns:
        Mapping of tensor name to gradient, same keys as params.named_tensors()

    Raises:
        ModelError: If the trace does not belong to these params
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    batch = trace.ids.shape[0]
    if trace.family != params.family or y.shape != (batch,):
        raise ModelError(
            f"Trace of a {trace.family.value} batch of {batch} does not match "
            f"{params.family.value} params with {y.shape[0]} labels"
        )
    if trace.pooled.shape[1] != params.state_dim:
        raise ModelError(f"Trace pooled dim {trace.pooled.shape[1]} != model state dim {params.state_dim}")

    grads = params.zeros_like()
    d_logits = bce_logit_gradient(trace.probabilities, y) / batch
    grads["dense.W"] = (d_logits @ trace.dense_input)[None, :]
    grads["dense.b"] = np.array([d_logits.sum()])
    d_pooled = _apply_mask(d_logits[:, None] * params.dense_W[0][None, :], trace.dropout_masks, "pooled")

    hidden = params.hidden_dim
    if params.family == ModelFamily.LSTM:
        cache2 = trace.layers["lstm2"]
        d_between, layer_grads = lstm_sequence_backward(
            np.zeros(cache2.inputs.shape[:2] + (hidden,)), d_pooled, cache2, params.recurrent["lstm2"]
        )
        _store(grads, "lstm2", layer_grads)
        d_first = _apply_mask(d_between, trace.dropout_masks, "between")
        d_inputs, layer_grads = lstm_sequence_backward(
            d_first, np.zeros((batch, hidden)), trace.layers["lstm1"], params.recurrent["lstm1"]
        )
        _store(grads, "lstm1", layer_grads)
    else:
        steps = trace.ids.shape[1]
        if trace.attention is not None:
            d_states, grads["attention.W_a"], grads["attention.v_a"] = attention_backward(
                d_pooled, trace.attention, params.attention
            )
            d_out_fwd = d_states[..., :hidden]
            d_out_rev = gather_time(d_states[..., hidden:], trace.reverse_index)
            d_final_fwd = d_final_bwd = np.zeros((batch, hidden))
        else:
            d_out_fwd = d_out_rev = np.zeros((batch, steps, hidden))
            d_final_fwd, d_final_bwd = d_pooled[:, :hidden], d_pooled[:, hidden:]

        d_inputs, layer_grads = lstm_sequence_backward(
            d_out_fwd, d_final_fwd, trace.layers["fwd"], params.recurrent["fwd"]
        )
        _store(grads, "fwd", layer_grads)
        d_inputs_rev, layer_grads = lstm_sequence_backward(
            d_out_rev, d_final_bwd, trace.layers["bwd"], params.recurrent["bwd"]
        )
        _store(grads, "bwd", layer_grads)
        d_inputs = d_inputs + gather_time(d_inputs_rev, trace.reverse_index)

    np.add.at(grads["embedding"], trace.ids, d_inputs)
    grads["embedding"][PAD_INDEX] = 0.0
    return grads


def _store(grads: Dict[str, np.ndarray], layer: str, layer_grads) -> None:
    for name, value in layer_grads.named().items():
        grads[f"{layer}.{name}"] = value


def loss_and_gradients(
    params: ModelParams,
    ids: np.ndarray,
    lengths: np.ndarray,
    y: np.ndarray,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, Dict[str, np.ndarray], ForwardTrace]:
    """Batch-mean BCE loss, its gradients and the forward trace."""
    trace = forward(params, ids, lengths, training=training, rng=rng)
    loss = float(np.mean(bce_loss(trace.probabilities, np.asarray(y, dtype=np.float64))))
    return loss, backward(trace, y, params), trace


def _trim(ids: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Drop trailing all-padding columns; outputs do not depend on them."""
    return ids[:, : int(lengths.max())]


def predict(
    params: ModelParams,
    ids: np.ndarray,
    lengths: Union[int, np.ndarray],
    batch_size: int = 256,
) -> Tuple[Union[float, np.ndarray], Union[int, np.ndarray]]:
    """
    Eval-mode probabilities and labels; label 1 iff probability >= 0.5.

    Accepts one sequence (ids of shape (time,)) or a batch.
    """
    ids, lengths, single = as_batch(ids, lengths)
    probabilities = np.empty(ids.shape[0])
    for start in range(0, ids.shape[0], batch_size):
        chunk = slice(start, start + batch_size)
        trace = forward(params, _trim(ids[chunk], lengths[chunk]), lengths[chunk])
        probabilities[chunk] = trace.probabilities
    labels = (probabilities >= DECISION_THRESHOLD).astype(np.int64)
    if single:
        return float(probabilities[0]), int(labels[0])
    return probabilities, labels


def attention_weights(params: ModelParams, ids: np.ndarray, length: int) -> np.ndarray:
    """Attention weights over the valid tokens of one sequence (V4 models only)."""
    if params.family != ModelFamily.BILSTM_ATTENTION:
        raise ModelError(f"{params.family.value} models have no attention layer")
    ids, lengths, _ = as_batch(ids, length)
    trace = forward(params, _trim(ids, lengths), lengths)
    return trace.attention_weights[0, :length]
