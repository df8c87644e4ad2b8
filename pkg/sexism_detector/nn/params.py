"""
Parameter containers and their initialisation.
"""
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from sexism_detector.schema.config_schema import ModelFamily
from sexism_detector.utils.exceptions import ModelError

GATES = ("i", "f", "o", "g")
LSTM_TENSORS = tuple(f"{kind}_{gate}" for kind in ("W", "U", "b") for gate in GATES)

RECURRENT_LAYERS = {
    ModelFamily.LSTM: ("lstm1", "lstm2"),
    ModelFamily.BILSTM: ("fwd", "bwd"),
    ModelFamily.BILSTM_ATTENTION: ("fwd", "bwd"),
}


@dataclass
class LstmCellParams:
    """Gate weights of one LSTM cell: W_* (hidden x input), U_* (hidden x hidden), b_* (hidden)."""

    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_g: np.ndarray
    U_i: np.ndarray
    U_f: np.ndarray
    U_o: np.ndarray
    U_g: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_g: np.ndarray

    def __post_init__(self):
        hidden, inputs = self.W_i.shape
        for gate in GATES:
            if getattr(self, f"W_{gate}").shape != (hidden, inputs):
                raise ModelError(f"W_{gate} has shape {getattr(self, f'W_{gate}').shape}, expected {(hidden, inputs)}")
            if getattr(self, f"U_{gate}").shape != (hidden, hidden):
                raise ModelError(f"U_{gate} has shape {getattr(self, f'U_{gate}').shape}, expected {(hidden, hidden)}")
            if getattr(self, f"b_{gate}").shape != (hidden,):
                raise ModelError(f"b_{gate} has shape {getattr(self, f'b_{gate}').shape}, expected {(hidden,)}")

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_i.shape[0]

    def named(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in LSTM_TENSORS}

    @classmethod
    def from_named(cls, tensors: Mapping[str, np.ndarray]) -> "LstmCellParams":
        return cls(**{name: np.asarray(tensors[name], dtype=np.float64) for name in LSTM_TENSORS})

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LstmCellParams":
        shapes = {"W": (hidden_dim, input_dim), "U": (hidden_dim, hidden_dim), "b": (hidden_dim,)}
        return cls(**{name: np.zeros(shapes[name[0]]) for name in LSTM_TENSORS})

    @classmethod
    def initialize(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LstmCellParams":
        """Uniform(+-1/sqrt(hidden)) weights, forget-gate bias 1, other biases 0."""
        limit = 1.0 / np.sqrt(hidden_dim)
        params = cls.zeros(input_dim, hidden_dim)
        for gate in GATES:
            setattr(params, f"W_{gate}", rng.uniform(-limit, limit, size=(hidden_dim, input_dim)))
            setattr(params, f"U_{gate}", rng.uniform(-limit, limit, size=(hidden_dim, hidden_dim)))
        params.b_f = np.ones(hidden_dim)
        return params


@dataclass
class AttentionParams:
    """Additive attention: score_t = v_a . tanh(W_a s_t)."""

    W_a: np.ndarray
    v_a: np.ndarray

    def __post_init__(self):
        if self.W_a.ndim != 2 or self.v_a.shape != (self.W_a.shape[0],):
            raise ModelError(f"Attention shapes disagree: W_a {self.W_a.shape}, v_a {self.v_a.shape}")

    @property
    def attention_dim(self) -> int:
        return self.W_a.shape[0]

    @property
    def state_dim(self) -> int:
        return self.W_a.shape[1]


@dataclass
class ModelParams:
    """
    Complete parameter set of one neural ladder model.

    Recurrent layers are keyed "lstm1"/"lstm2" (stacked, V2) or "fwd"/"bwd"
    (bidirectional, V3/V4). The dense layer maps the pooled state to one logit.
    """

    family: ModelFamily
    embedding: np.ndarray
    recurrent: Dict[str, LstmCellParams]
    dense_W: np.ndarray
    dense_b: np.ndarray
    attention: Optional[AttentionParams] = None
    dropout_rate: float = 0.5
    trainable_embeddings: bool = True

    def __post_init__(self):
        self.family = ModelFamily(self.family)
        if not self.family.is_neural:
            raise ModelError(f"{self.family.value} is not a neural model family")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ModelError(f"Dropout rate must lie in [0, 1), got {self.dropout_rate}")
        if self.embedding.ndim != 2:
            raise ModelError(f"Embedding must be 2-D, got shape {self.embedding.shape}")

        names = RECURRENT_LAYERS[self.family]
        if tuple(self.recurrent) != names:
            raise ModelError(f"{self.family.value} needs recurrent layers {names}, got {tuple(self.recurrent)}")

        emb_dim = self.embedding.shape[1]
        first, second = (self.recurrent[n] for n in names)
        if first.input_dim != emb_dim:
            raise ModelError(f"{names[0]} expects input dim {first.input_dim}, embedding dim is {emb_dim}")
        if self.family == ModelFamily.LSTM:
            if second.input_dim != first.hidden_dim or second.hidden_dim != first.hidden_dim:
                raise ModelError(f"lstm2 must read and emit {first.hidden_dim} units, got {second.input_dim}->{second.hidden_dim}")
        elif second.input_dim != emb_dim or second.hidden_dim != first.hidden_dim:
            raise ModelError("Forward and backward LSTM shapes differ")

        if self.family == ModelFamily.BILSTM_ATTENTION:
            if self.attention is None or self.attention.state_dim != self.state_dim:
                raise ModelError(f"Attention must read states of dim {self.state_dim}")
        elif self.attention is not None:
            raise ModelError(f"{self.family.value} has no attention layer")

        if self.dense_W.shape != (1, self.state_dim) or self.dense_b.shape != (1,):
            raise ModelError(
                f"Dense layer shapes {self.dense_W.shape}/{self.dense_b.shape}, expected (1, {self.state_dim})/(1,)"
            )

    @property
    def hidden_dim(self) -> int:
        return next(iter(self.recurrent.values())).hidden_dim

    @property
    def state_dim(self) -> int:
        """Width of the pooled vector fed to the dense layer."""
        return self.hidden_dim if self.family == ModelFamily.LSTM else 2 * self.hidden_dim

    def named_tensors(self) -> Dict[str, np.ndarray]:
        tensors = {"embedding": self.embedding}
        for layer, cell in self.recurrent.items():
            tensors.update({f"{layer}.{name}": value for name, value in cell.named().items()})
        if self.attention is not None:
            tensors["attention.W_a"] = self.attention.W_a
            tensors["attention.v_a"] = self.attention.v_a
        tensors["dense.W"] = self.dense_W
        tensors["dense.b"] = self.dense_b
        return tensors

    def trainable_names(self) -> List[str]:
        return [name for name in self.named_tensors() if name != "embedding" or self.trainable_embeddings]

    def with_tensors(self, updates: Mapping[str, np.ndarray]) -> "ModelParams":
        """Copy of these params with some named tensors replaced."""
        tensors = {**self.named_tensors(), **updates}
        return ModelParams.from_named_tensors(
            self.family, tensors, dropout_rate=self.dropout_rate, trainable_embeddings=self.trainable_embeddings
        )

    def copy(self) -> "ModelParams":
        return self.with_tensors({name: value.copy() for name, value in self.named_tensors().items()})

    @classmethod
    def from_named_tensors(
        cls,
        family: ModelFamily,
        tensors: Mapping[str, np.ndarray],
        dropout_rate: float = 0.5,
        trainable_embeddings: bool = True,
    ) -> "ModelParams":
        family = ModelFamily(family)
        try:
            recurrent = {
                layer: LstmCellParams.from_named(
                    {name: tensors[f"{layer}.{name}"] for name in LSTM_TENSORS}
                )
                for layer in RECURRENT_LAYERS[family]
            }
            attention = None
            if family == ModelFamily.BILSTM_ATTENTION:
                attention = AttentionParams(
                    W_a=np.asarray(tensors["attention.W_a"], dtype=np.float64),
                    v_a=np.asarray(tensors["attention.v_a"], dtype=np.float64),
                )
            return cls(
                family=family,
                embedding=np.asarray(tensors["embedding"], dtype=np.float64),
                recurrent=recurrent,
                attention=attention,
                dense_W=np.asarray(tensors["dense.W"], dtype=np.float64),
                dense_b=np.asarray(tensors["dense.b"], dtype=np.float64),
                dropout_rate=dropout_rate,
                trainable_embeddings=trainable_embeddings,
            )
        except KeyError as e:
            raise ModelError(f"Missing tensor {e} for a {family.value} model") from e

    def zeros_like(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(value) for name, value in self.named_tensors().items()}


def glorot_uniform(fan_out: int, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(
    family: ModelFamily,
    embedding: np.ndarray,
    hidden_size: int,
    attention_size: int = 64,
    dropout_rate: float = 0.5,
    seed: int = 0,
    trainable_embeddings: bool = True,
) -> ModelParams:
    """
    Randomly initialise a model around a prepared embedding matrix.

    Args:
        family: lstm | bilstm | bilstm_attention
        embedding: Initial embedding rows (copied)
        hidden_size: Hidden units per LSTM direction
        attention_size: Attention projection size
        dropout_rate: Dropout between recurrent layers and before the dense layer
        seed: Initialisation seed
        trainable_embeddings: Whether training updates the embedding rows

    Returns:
        ModelParams
    """
    family = ModelFamily(family)
    rng = np.random.default_rng(seed)
    embedding = np.array(embedding, dtype=np.float64)
    emb_dim = embedding.shape[1]

    names = RECURRENT_LAYERS.get(family)
    if names is None:
        raise ModelError(f"{family.value} is not a neural model family")
    if family == ModelFamily.LSTM:
        recurrent = {
            "lstm1": LstmCellParams.initialize(emb_dim, hidden_size, rng),
            "lstm2": LstmCellParams.initialize(hidden_size, hidden_size, rng),
        }
        state_dim = hidden_size
    else:
        recurrent = {name: LstmCellParams.initialize(emb_dim, hidden_size, rng) for name in names}
        state_dim = 2 * hidden_size

    attention = None
    if family == ModelFamily.BILSTM_ATTENTION:
        limit = 1.0 / np.sqrt(attention_size)
        attention = AttentionParams(
            W_a=glorot_uniform(attention_size, state_dim, rng),
            v_a=rng.uniform(-limit, limit, size=attention_size),
        )

    return ModelParams(
        family=family,
        embedding=embedding,
        recurrent=recurrent,
        attention=attention,
        dense_W=glorot_uniform(1, state_dim, rng),
        dense_b=np.zeros(1),
        dropout_rate=dropout_rate,
        trainable_embeddings=trainable_embeddings,
    )
