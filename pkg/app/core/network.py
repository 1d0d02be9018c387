"""Single-hidden-layer tanh network M(x; a) with hand-derived gradients"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import DomainError


@dataclass
class ModelParameters:
    """Network parameters; flat layout order: hidden weights, hidden biases, output weights, output bias"""
    hidden_weights: np.ndarray   # (H, n)
    hidden_biases: np.ndarray    # (H,)
    output_weights: np.ndarray   # (H,)
    output_bias: float

    @property
    def n_inputs(self) -> int:
        return int(self.hidden_weights.shape[1])

    @property
    def n_hidden(self) -> int:
        return int(self.hidden_weights.shape[0])

    @property
    def size(self) -> int:
        return self.n_hidden * self.n_inputs + 2 * self.n_hidden + 1

    def flatten(self) -> np.ndarray:
        return np.concatenate([
            self.hidden_weights.reshape(-1),
            self.hidden_biases,
            self.output_weights,
            [self.output_bias],
        ])

    @classmethod
    def from_flat(cls, values: np.ndarray, n_inputs: int, n_hidden: int) -> "ModelParameters":
        values = np.asarray(values, dtype=float)
        expected = n_hidden * n_inputs + 2 * n_hidden + 1
        if values.size != expected:
            raise DomainError(f"expected {expected} parameter values, got {values.size}")
        split = n_hidden * n_inputs
        return cls(
            hidden_weights=values[:split].reshape(n_hidden, n_inputs).copy(),
            hidden_biases=values[split:split + n_hidden].copy(),
            output_weights=values[split + n_hidden:split + 2 * n_hidden].copy(),
            output_bias=float(values[-1]),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "n_inputs": self.n_inputs,
            "n_hidden": self.n_hidden,
            "layout": ["hidden_weights", "hidden_biases", "output_weights", "output_bias"],
            "values": [float(v) for v in self.flatten()],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ModelParameters":
        return cls.from_flat(np.asarray(data["values"], dtype=float), int(data["n_inputs"]), int(data["n_hidden"]))

    def copy(self) -> "ModelParameters":
        return ModelParameters.from_flat(self.flatten(), self.n_inputs, self.n_hidden)


def init_parameters(n_inputs: int, n_hidden: int = 64, rng: np.random.Generator = None) -> ModelParameters:
    """Glorot-uniform weights, zero biases"""
    rng = rng or np.random.default_rng()
    hidden_limit = np.sqrt(6.0 / (n_inputs + n_hidden))
    output_limit = np.sqrt(6.0 / (n_hidden + 1))
    return ModelParameters(
        hidden_weights=rng.uniform(-hidden_limit, hidden_limit, size=(n_hidden, n_inputs)),
        hidden_biases=np.zeros(n_hidden),
        output_weights=rng.uniform(-output_limit, output_limit, size=n_hidden),
        output_bias=0.0,
    )


def _as_batch(params: ModelParameters, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = np.atleast_2d(x)
    if batch.shape[1] != params.n_inputs:
        raise DomainError(f"input dimension {batch.shape[1]} does not match {params.n_inputs}")
    return batch, single


def forward(params: ModelParameters, x):
    """out_bias + out_weights · tanh(W x + b) for one vector or an (N, n) batch"""
    batch, single = _as_batch(params, x)
    hidden = np.tanh(batch @ params.hidden_weights.T + params.hidden_biases)
    out = hidden @ params.output_weights + params.output_bias
    return float(out[0]) if single else out


def backward(params: ModelParameters, x, upstream) -> ModelParameters:
    """Gradient of Σ_k upstream_k · M(x_k) with respect to the parameters"""
    batch, _ = _as_batch(params, x)
    upstream = np.asarray(upstream, dtype=float).reshape(-1)
    if upstream.size != batch.shape[0]:
        raise DomainError("one upstream derivative per sample is required")
    hidden = np.tanh(batch @ params.hidden_weights.T + params.hidden_biases)   # (N, H)
    delta = upstream[:, None] * params.output_weights * (1.0 - hidden ** 2)    # (N, H)
    return ModelParameters(
        hidden_weights=delta.T @ batch,
        hidden_biases=delta.sum(axis=0),
        output_weights=hidden.T @ upstream,
        output_bias=float(upstream.sum()),
    )
