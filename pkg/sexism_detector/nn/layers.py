"""
Layer kernels with exact forward and backward passes.

Sequence kernels work on (batch, time, features) inputs with a (batch, time)
boolean prefix mask: a masked step carries the previous state through
unchanged and emits a zero output. The single-sequence operations are the
batch-of-one case of the same code.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from sexism_detector.nn.params import GATES, AttentionParams, LstmCellParams
from sexism_detector.utils.exceptions import ModelError

BCE_EPSILON = 1e-7
DROPOUT_MODES = ("train", "eval")


class CellTrace(NamedTuple):
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray


def lstm_cell_forward(
    x_t: np.ndarray,
    h_prev: np.ndarray,
    c_prev: np.ndarray,
    p: LstmCellParams,
) -> Tuple[np.ndarray, np.ndarray, CellTrace]:
    """
    One LSTM step; inputs may be vectors or (batch, dim) matrices.

    Returns:
        (h_t, c_t, gate trace)

    Raises:
        ModelError: On inconsistent dimensions
    """
    if x_t.shape[-1] != p.input_dim:
        raise ModelError(f"LSTM input has dim {x_t.shape[-1]}, cell expects {p.input_dim}")
    if h_prev.shape[-1] != p.hidden_dim or c_prev.shape != h_prev.shape:
        raise ModelError(f"LSTM state shapes {h_prev.shape}/{c_prev.shape} do not match hidden dim {p.hidden_dim}")

    i = expit(x_t @ p.W_i.T + h_prev @ p.U_i.T + p.b_i)
    f = expit(x_t @ p.W_f.T + h_prev @ p.U_f.T + p.b_f)
    o = expit(x_t @ p.W_o.T + h_prev @ p.U_o.T + p.b_o)
    g = np.tanh(x_t @ p.W_g.T + h_prev @ p.U_g.T + p.b_g)
    c_t = f * c_prev + i * g
    tanh_c = np.tanh(c_t)
    h_t = o * tanh_c
    return h_t, c_t, CellTrace(i, f, o, g, tanh_c)


@dataclass
class LstmCache:
    inputs: np.ndarray
    mask: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    gates: CellTrace


def sequence_mask(lengths: np.ndarray, max_len: int) -> np.ndarray:
    """(batch, time) boolean mask of the valid prefix of every sequence."""
    return np.arange(max_len)[None, :] < np.asarray(lengths)[:, None]


def reverse_valid_prefix_index(lengths: np.ndarray, max_len: int) -> np.ndarray:
    """
    Per-row time permutation that reverses the valid prefix and leaves padding
    in place. The permutation is its own inverse.
    """
    t = np.arange(max_len)[None, :]
    lengths = np.asarray(lengths)[:, None]
    return np.where(t < lengths, lengths - 1 - t, t)


def gather_time(x: np.ndarray, index: np.ndarray) -> np.ndarray:
    """x[b, index[b, t]] for (batch, time, ...) arrays."""
    return np.take_along_axis(x, index.reshape(index.shape + (1,) * (x.ndim - 2)), axis=1)


def lstm_sequence_forward(
    inputs: np.ndarray,
    mask: np.ndarray,
    p: LstmCellParams,
) -> Tuple[np.ndarray, np.ndarray, LstmCache]:
    """
    Run an LSTM over (batch, time, input) with h_0 = c_0 = 0.

    Returns:
        (outputs (batch, time, hidden), final hidden state (batch, hidden), cache)
    """
    batch, steps, _ = inputs.shape
    hidden = p.hidden_dim
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    outputs = np.zeros((batch, steps, hidden))
    h_prev = np.zeros_like(outputs)
    c_prev = np.zeros_like(outputs)
    gates = CellTrace(*(np.zeros_like(outputs) for _ in CellTrace._fields))

    for t in range(steps):
        m = mask[:, t, None]
        h_prev[:, t], c_prev[:, t] = h, c
        h_new, c_new, trace = lstm_cell_forward(inputs[:, t], h, c, p)
        for stored, value in zip(gates, trace):
            stored[:, t] = value
        outputs[:, t] = np.where(m, h_new, 0.0)
        h = np.where(m, h_new, h)
        c = np.where(m, c_new, c)

    return outputs, h, LstmCache(inputs=inputs, mask=mask, h_prev=h_prev, c_prev=c_prev, gates=gates)


def lstm_sequence_backward(
    d_outputs: np.ndarray,
    d_final: np.ndarray,
    cache: LstmCache,
    p: LstmCellParams,
) -> Tuple[np.ndarray, LstmCellParams]:
    """
    Backpropagate through lstm_sequence_forward.

    Args:
        d_outputs: Loss gradient w.r.t. the per-step outputs
        d_final: Loss gradient w.r.t. the final hidden state
        cache: Cache returned by the forward pass
        p: Cell parameters used in the forward pass

    Returns:
        (gradient w.r.t. inputs, gradients of the cell parameters)
    """
    grads = LstmCellParams.zeros(p.input_dim, p.hidden_dim)
    d_inputs = np.zeros_like(cache.inputs)
    dh = np.array(d_final, dtype=np.float64)
    dc = np.zeros_like(dh)

    for t in reversed(range(cache.inputs.shape[1])):
        m = cache.mask[:, t, None]
        i, f, o, g, tanh_c = (gate[:, t] for gate in cache.gates)
        x_t = cache.inputs[:, t]
        h_prev = cache.h_prev[:, t]

        dh_new = np.where(m, dh + d_outputs[:, t], 0.0)
        dc_new = np.where(m, dc, 0.0) + dh_new * o * (1.0 - tanh_c ** 2)
        dz = {
            "i": dc_new * g * i * (1.0 - i),
            "f": dc_new * cache.c_prev[:, t] * f * (1.0 - f),
            "o": dh_new * tanh_c * o * (1.0 - o),
            "g": dc_new * i * (1.0 - g ** 2),
        }

        dx = np.zeros_like(x_t)
        dh_prev = np.where(m, 0.0, dh)
        for gate in GATES:
            W, U = getattr(p, f"W_{gate}"), getattr(p, f"U_{gate}")
            getattr(grads, f"W_{gate}")[...] += dz[gate].T @ x_t
            getattr(grads, f"U_{gate}")[...] += dz[gate].T @ h_prev
            getattr(grads, f"b_{gate}")[...] += dz[gate].sum(axis=0)
            dx += dz[gate] @ W
            dh_prev += dz[gate] @ U

        d_inputs[:, t] = dx
        dc = dc_new * f + np.where(m, 0.0, dc)
        dh = dh_prev

    return d_inputs, grads


def as_batch(ids: np.ndarray, lengths) -> Tuple[np.ndarray, np.ndarray, bool]:
    ids = np.asarray(ids, dtype=np.int64)
    single = ids.ndim == 1
    if single:
        ids = ids[None, :]
        lengths = np.array([lengths], dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.shape != (ids.shape[0],):
        raise ModelError(f"Got {lengths.shape} lengths for {ids.shape[0]} sequences")
    if np.any(lengths < 1):
        raise ModelError("empty sequence")
    if np.any(lengths > ids.shape[1]):
        raise ModelError(f"Valid length exceeds the sequence length {ids.shape[1]}")
    return ids, lengths, single


def _embedding_rows(embedding) -> np.ndarray:
    return np.asarray(getattr(embedding, "rows", embedding), dtype=np.float64)


def lstm_layer_forward(
    ids: np.ndarray,
    valid_length: Union[int, np.ndarray],
    embedding,
    p: LstmCellParams,
    direction: str = "fwd",
) -> np.ndarray:
    """
    Hidden-state sequence of one LSTM direction over embedded token ids.

    The backward direction reads the valid prefix in reverse; outputs are
    reported at the original positions. Padding positions hold zeros.

    Args:
        ids: (time,) or (batch, time) token indices
        valid_length: Valid prefix length(s)
        embedding: EmbeddingMatrix or (vocab, dim) array
        p: Cell parameters
        direction: "fwd" or "bwd"

    Raises:
        ModelError: Empty sequence or bad direction
    """
    if direction not in ("fwd", "bwd"):
        raise ModelError(f"direction must be 'fwd' or 'bwd', got {direction!r}")
    ids, lengths, single = as_batch(ids, valid_length)
    inputs = _embedding_rows(embedding)[ids]
    mask = sequence_mask(lengths, ids.shape[1])
    if direction == "bwd":
        reverse = reverse_valid_prefix_index(lengths, ids.shape[1])
        outputs, _, _ = lstm_sequence_forward(gather_time(inputs, reverse), mask, p)
        outputs = gather_time(outputs, reverse)
    else:
        outputs, _, _ = lstm_sequence_forward(inputs, mask, p)
    return outputs[0] if single else outputs


def bilstm_forward(
    ids: np.ndarray,
    valid_length: Union[int, np.ndarray],
    embedding,
    p_fwd: LstmCellParams,
    p_bwd: LstmCellParams,
) -> np.ndarray:
    """Per-step concatenation [h_fwd_t ; h_bwd_t] of both directions."""
    forward = lstm_layer_forward(ids, valid_length, embedding, p_fwd, "fwd")
    backward = lstm_layer_forward(ids, valid_length, embedding, p_bwd, "bwd")
    return np.concatenate([forward, backward], axis=-1)


@dataclass
class AttentionCache:
    states: np.ndarray
    mask: np.ndarray
    projection: np.ndarray
    weights: np.ndarray


def attention_pool(
    states: np.ndarray,
    mask: np.ndarray,
    p: AttentionParams,
) -> Tuple[np.ndarray, np.ndarray, AttentionCache]:
    """
    Additive attention over (batch, time, state) with a masked softmax.

    Returns:
        (context (batch, state), weights (batch, time), cache)
    """
    if states.shape[-1] != p.state_dim:
        raise ModelError(f"Attention reads states of dim {p.state_dim}, got {states.shape[-1]}")
    projection = np.tanh(states @ p.W_a.T)
    scores = np.where(mask, projection @ p.v_a, -np.inf)
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp_scores = np.where(mask, np.exp(shifted), 0.0)
    weights = exp_scores / exp_scores.sum(axis=1, keepdims=True)
    context = np.einsum("bt,btd->bd", weights, states)
    return context, weights, AttentionCache(states=states, mask=mask, projection=projection, weights=weights)


def attention_backward(
    d_context: np.ndarray,
    cache: AttentionCache,
    p: AttentionParams,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns:
        (gradient w.r.t. states, dW_a, dv_a)
    """
    weights, states, projection = cache.weights, cache.states, cache.projection
    d_states = weights[:, :, None] * d_context[:, None, :]
    d_weights = np.einsum("bd,btd->bt", d_context, states)
    d_scores = weights * (d_weights - np.sum(weights * d_weights, axis=1, keepdims=True))
    dv_a = np.einsum("bt,bta->a", d_scores, projection)
    d_pre = d_scores[:, :, None] * p.v_a[None, None, :] * (1.0 - projection ** 2)
    dW_a = np.einsum("bta,btd->ad", d_pre, states)
    d_states += d_pre @ p.W_a
    return d_states, dW_a, dv_a


def attention_forward(
    states: np.ndarray,
    valid_length: Union[int, np.ndarray],
    p: AttentionParams,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Attention pooling of one (time, state) sequence or a batch of them.

    Padding positions get weight exactly 0.

    Returns:
        (context vector, weights)
    """
    states = np.asarray(states, dtype=np.float64)
    single = states.ndim == 2
    if single:
        states = states[None]
        valid_length = np.array([valid_length])
    lengths = np.asarray(valid_length)
    if np.any(lengths < 1):
        raise ModelError("empty sequence")
    context, weights, _ = attention_pool(states, sequence_mask(lengths, states.shape[1]), p)
    return (context[0], weights[0]) if single else (context, weights)


def dense_logit(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ W[0] + b[0]


def dense_sigmoid_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> Union[float, np.ndarray]:
    """p = sigmoid(W x + b) with W of shape (1, dim) and b of shape (1,)."""
    W = np.atleast_2d(W)
    b = np.atleast_1d(b)
    if x.shape[-1] != W.shape[1]:
        raise ModelError(f"Dense layer expects input dim {W.shape[1]}, got {x.shape[-1]}")
    return expit(dense_logit(x, W, b))


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability `rate`, else 1 / (1 - rate)."""
    if not 0.0 <= rate < 1.0:
        raise ModelError(f"Dropout rate must lie in [0, 1), got {rate}")
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def dropout(
    x: np.ndarray,
    rate: float,
    mode: str = "train",
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Inverted dropout; the identity in eval mode and for rate 0.

    Raises:
        ModelError: Rate outside [0, 1), unknown mode, or train mode without a generator
    """
    if not 0.0 <= rate < 1.0:
        raise ModelError(f"Dropout rate must lie in [0, 1), got {rate}")
    if mode not in DROPOUT_MODES:
        raise ModelError(f"Dropout mode must be one of {DROPOUT_MODES}, got {mode!r}")
    if mode == "eval" or rate == 0.0:
        return x
    if rng is None:
        raise ModelError("Train-mode dropout needs a random generator")
    return x * dropout_mask(np.shape(x), rate, rng)


def bce_loss(p, y):
    """
    Binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].

    Works elementwise on arrays; returns a float for scalar inputs.
    """
    clamped = np.clip(p, BCE_EPSILON, 1.0 - BCE_EPSILON)
    loss = -(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped))
    return float(loss) if np.ndim(loss) == 0 else loss


def bce_logit_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    d BCE / d logit = p - y, the gradient of the unclamped loss.

    The clamp in bce_loss only bounds the reported value.
    """
    return np.asarray(p, dtype=np.float64) - np.asarray(y, dtype=np.float64)
