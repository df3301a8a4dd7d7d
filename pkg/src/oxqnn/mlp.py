"""Small fully connected sigmoid network trained with full-batch Adam.

Weights live in one flat vector. For each layer ``l`` the block is the
``(n_out, n_in)`` weight matrix in row-major order followed by the
``n_out`` biases. Hidden layers use a sigmoid, the output neuron is affine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericalError


@dataclass(frozen=True)
class MlpArchitecture:
    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2 or any(n < 1 for n in sizes):
            raise InvalidArgumentError(f"bad layer sizes {sizes}")
        if sizes[-1] != 1:
            raise InvalidArgumentError("output layer must have a single neuron")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def parse(cls, text: str) -> "MlpArchitecture":
        """``"5-3-1"`` -> ``MlpArchitecture((5, 3, 1))``."""
        return cls(tuple(int(t) for t in text.split("-")))

    @property
    def label(self) -> str:
        return "-".join(map(str, self.layer_sizes))

    @property
    def parameter_count(self) -> int:
        s = self.layer_sizes
        return sum(a * b + b for a, b in zip(s[:-1], s[1:]))

    def unpack(self, weights: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.parameter_count,):
            raise InvalidArgumentError(f"{self.label} needs {self.parameter_count} weights, got {weights.size}")
        layers, pos = [], 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = weights[pos:pos + n_in * n_out].reshape(n_out, n_in)
            pos += n_in * n_out
            b = weights[pos:pos + n_out]
            pos += n_out
            layers.append((w, b))
        return layers

    def connection_mask(self) -> np.ndarray:
        """1.0 for connection weights, 0.0 for biases."""
        mask, pos = np.zeros(self.parameter_count), 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            mask[pos:pos + n_in * n_out] = 1.0
            pos += n_in * n_out + n_out
        return mask


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.02
    epochs: int = 10000
    l2_weight: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")
        if self.epochs < 1:
            raise InvalidArgumentError("epochs must be >= 1")
        if self.l2_weight < 0:
            raise InvalidArgumentError("l2_weight must be >= 0")


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _check_inputs(arch: MlpArchitecture, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != arch.layer_sizes[0]:
        raise InvalidArgumentError(f"{arch.label} expects {arch.layer_sizes[0]} inputs, got {x.shape[1]}")
    return x


def mlp_forward_batch(arch: MlpArchitecture, weights, inputs) -> np.ndarray:
    a = _check_inputs(arch, inputs)
    layers = arch.unpack(weights)
    for i, (w, b) in enumerate(layers):
        z = a @ w.T + b
        a = z if i == len(layers) - 1 else sigmoid(z)
    return a[:, 0]


def mlp_forward(arch: MlpArchitecture, weights, inputs: Sequence[float]) -> float:
    return float(mlp_forward_batch(arch, weights, [inputs])[0])


def loss_and_gradient(arch: MlpArchitecture, weights, inputs, targets, l2_weight: float = 0.0):
    """MSE plus ``l2_weight * sum(w**2)`` over connection weights, and its gradient."""
    x = _check_inputs(arch, inputs)
    y = np.asarray(targets, dtype=float).ravel()
    if x.shape[0] == 0:
        raise InvalidArgumentError("empty batch")
    if y.shape[0] != x.shape[0]:
        raise InvalidArgumentError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
    weights = np.asarray(weights, dtype=float)
    layers = arch.unpack(weights)
    acts = [x]
    for i, (w, b) in enumerate(layers):
        z = acts[-1] @ w.T + b
        acts.append(z if i == len(layers) - 1 else sigmoid(z))
    residual = acts[-1][:, 0] - y
    n = y.size
    mask = arch.connection_mask()
    loss = float(residual @ residual / n + l2_weight * np.sum((weights * mask) ** 2))

    grads = []
    delta = (2.0 / n) * residual[:, None]
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads.append((delta.T @ acts[i], delta.sum(axis=0)))
        if i:
            a = acts[i]
            delta = (delta @ w) * a * (1.0 - a)
    grad = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in reversed(grads)])
    grad += 2.0 * l2_weight * weights * mask
    return loss, grad


@dataclass
class AdamState:
    weights: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def start(cls, weights) -> "AdamState":
        w = np.array(weights, dtype=float)
        return cls(w, np.zeros_like(w), np.zeros_like(w), 0)


def adam_step(state: AdamState, gradient, learning_rate: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    g = np.asarray(gradient, dtype=float)
    if g.shape != state.weights.shape:
        raise InvalidArgumentError("gradient shape does not match weights")
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * g
    v = beta2 * state.v + (1 - beta2) * g * g
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    w = state.weights - learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(w, m, v, t)


def init_weights(arch: MlpArchitecture, seed: int) -> np.ndarray:
    """Uniform in +-1/sqrt(fan_in), biases included."""
    rng = np.random.default_rng(seed)
    parts = []
    for n_in, n_out in zip(arch.layer_sizes[:-1], arch.layer_sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        parts.append(rng.uniform(-bound, bound, size=n_in * n_out + n_out))
    return np.concatenate(parts)


@dataclass
class MlpTrainResult:
    arch: MlpArchitecture
    weights: np.ndarray
    loss_trace: list[float] = field(default_factory=list)

    @property
    def connection_norm2(self) -> float:
        return float(np.sum((self.weights * self.arch.connection_mask()) ** 2))

    def predict(self, inputs) -> np.ndarray:
        return mlp_forward_batch(self.arch, self.weights, inputs)


def train_mlp(arch: MlpArchitecture, inputs, targets, config: TrainingConfig | None = None) -> MlpTrainResult:
    """Full-batch Adam for ``config.epochs`` epochs. Inputs and targets are already scaled."""
    config = config or TrainingConfig()
    x = _check_inputs(arch, inputs)
    y = np.asarray(targets, dtype=float).ravel()
    state = AdamState.start(init_weights(arch, config.seed))
    trace = []
    for _ in range(config.epochs):
        loss, grad = loss_and_gradient(arch, state.weights, x, y, config.l2_weight)
        if not np.isfinite(loss):
            raise NumericalError(f"MLP loss diverged at epoch {state.t}")
        trace.append(loss)
        state = adam_step(state, grad, config.learning_rate)
    return MlpTrainResult(arch, state.weights, trace)
