"""Fully connected regression network: forward pass, loss and backpropagation.

Each layer's weight matrix carries its bias as the last row, so layer ``l``
maps an ``N x fan_in`` input ``Z`` to ``A = Z @ W[:fan_in] + W[fan_in]``.
Hidden layers apply the configured activation to ``A``; the output layer is
linear. The loss is the mean squared error plus ``alpha / 2`` times the sum
of squared non-bias weights.
"""

from __future__ import annotations

import enum
import math
from array import array
from dataclasses import dataclass, field
from typing import Sequence

from .numeric import Matrix, Rng, ShapeError, elementwise, matmul, transpose, uniform
from .numeric.matrix import vstack


class Activation(str, enum.Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"

    @property
    def code(self) -> int:
        return _CODES[self]

    def apply(self, a: Matrix) -> Matrix:
        return elementwise("activate", self.code, a)

    def derivative(self, a: Matrix) -> Matrix:
        return elementwise("activate_derivative", self.code, a)


_CODES = {Activation.RELU: 0, Activation.SIGMOID: 1, Activation.TANH: 2}


def activation_apply(act: Activation, a: Matrix) -> Matrix:
    return Activation(act).apply(a)


def activation_derivative(act: Activation, a: Matrix) -> Matrix:
    """Elementwise H'(a). The ReLU derivative at exactly 0 is taken as 0."""
    return Activation(act).derivative(a)


@dataclass(frozen=True)
class NetworkConfig:
    hidden_layers: int = 1
    hidden_nodes: int = 40
    activation: Activation = Activation.TANH
    l2_alpha: float = 1e-4
    input_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        if self.hidden_layers < 1:
            raise ValueError(f"hidden_layers must be >= 1, got {self.hidden_layers}")
        if self.hidden_nodes < 1:
            raise ValueError(f"hidden_nodes must be >= 1, got {self.hidden_nodes}")
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if not (self.l2_alpha >= 0 and math.isfinite(self.l2_alpha)):
            raise ValueError(f"l2_alpha must be a finite value >= 0, got {self.l2_alpha}")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [self.hidden_nodes] * self.hidden_layers + [1]

    @property
    def weight_shapes(self) -> list[tuple[int, int]]:
        sizes = self.layer_sizes
        return [(sizes[i] + 1, sizes[i + 1]) for i in range(len(sizes) - 1)]

    @property
    def parameter_count(self) -> int:
        return sum(r * c for r, c in self.weight_shapes)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_layers": self.hidden_layers,
            "hidden_nodes": self.hidden_nodes,
            "activation": self.activation.value,
            "l2_alpha": self.l2_alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> NetworkConfig:
        return cls(
            hidden_layers=int(d["hidden_layers"]),
            hidden_nodes=int(d["hidden_nodes"]),
            activation=Activation(d["activation"]),
            l2_alpha=float(d["l2_alpha"]),
            input_dim=int(d.get("input_dim", 2)),
        )


@dataclass(frozen=True)
class Network:
    config: NetworkConfig
    weights: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        expected = self.config.weight_shapes
        got = [w.shape for w in self.weights]
        if got != expected:
            raise ShapeError(f"weight shapes {got} do not chain as {expected}")


@dataclass(frozen=True)
class ForwardTrace:
    """Per-layer linear outputs ``A`` and activations ``Z`` (``Z[0]`` is the input)."""

    linear: tuple[Matrix, ...]
    activations: tuple[Matrix, ...] = field(repr=False)


def init_weights(config: NetworkConfig, rng: Rng) -> Network:
    """Glorot-uniform weights with zero bias rows."""
    weights = []
    for rows, cols in config.weight_shapes:
        fan_in = rows - 1
        limit = math.sqrt(6.0 / (fan_in + cols))
        body = uniform(rng, -limit, limit, fan_in, cols)
        weights.append(vstack(body, Matrix.zeros(1, cols)))
    return Network(config, tuple(weights))


def _split_bias(w: Matrix) -> tuple[Matrix, Matrix]:
    return w.row_slice(0, w.rows - 1), w.row_slice(w.rows - 1, w.rows)


def forward(net: Network, x: Matrix) -> tuple[Matrix, ForwardTrace]:
    if x.cols != net.config.input_dim:
        raise ShapeError(
            f"forward: input has {x.cols} features, network expects {net.config.input_dim}"
        )
    act = net.config.activation
    z = x
    linear = []
    activations = [x]
    last = len(net.weights) - 1
    for l, w in enumerate(net.weights):
        body, bias = _split_bias(w)
        a = matmul(z, body).add_row(bias)
        linear.append(a)
        if l < last:
            z = act.apply(a)
            activations.append(z)
    return linear[-1], ForwardTrace(tuple(linear), tuple(activations))


def predict(net: Network, x: Matrix) -> Matrix:
    if x.cols != net.config.input_dim:
        raise ShapeError(
            f"predict: input has {x.cols} features, network expects {net.config.input_dim}"
        )
    act = net.config.activation
    z = x
    last = len(net.weights) - 1
    for l, w in enumerate(net.weights):
        body, bias = _split_bias(w)
        z = matmul(z, body).add_row(bias)
        if l < last:
            z = act.apply(z)
    return z


def penalty_sum_squares(net: Network) -> float:
    """Sum of squared non-bias weights."""
    return sum(_split_bias(w)[0].sum_squares() for w in net.weights)


def loss(net: Network, predictions: Matrix, targets: Matrix) -> float:
    if predictions.shape != targets.shape or predictions.cols != 1:
        raise ShapeError(
            f"loss: predictions {predictions.shape} and targets {targets.shape} must both be N x 1"
        )
    n = predictions.rows
    if n == 0:
        raise ValueError("loss: no samples")
    mse = (predictions - targets).sum_squares() / n
    return mse + 0.5 * net.config.l2_alpha * penalty_sum_squares(net)


def backward(net: Network, trace: ForwardTrace, x: Matrix, targets: Matrix) -> list[Matrix]:
    """Gradients of :func:`loss` with respect to every weight matrix."""
    weights = net.weights
    if len(trace.linear) != len(weights) or trace.activations[0] is not x and trace.activations[0] != x:
        raise ShapeError("backward: trace was not produced by forward on this network and input")
    pred = trace.linear[-1]
    if pred.shape != targets.shape:
        raise ShapeError(f"backward: predictions {pred.shape} vs targets {targets.shape}")
    for a, w in zip(trace.linear, weights):
        if a.cols != w.cols or a.rows != x.rows:
            raise ShapeError("backward: trace shapes do not match the network")
    n = x.rows
    alpha = net.config.l2_alpha
    act = net.config.activation

    delta = (pred - targets) * (2.0 / n)
    grads: list[Matrix] = [None] * len(weights)  # type: ignore[list-item]
    for l in range(len(weights) - 1, -1, -1):
        z_prev = trace.activations[l]
        body, _ = _split_bias(weights[l])
        g_body = matmul(transpose(z_prev), delta)
        if alpha:
            g_body = g_body + body * alpha
        grads[l] = vstack(g_body, delta.col_sums())
        if l > 0:
            delta = matmul(delta, transpose(body)).hadamard(act.derivative(trace.linear[l - 1]))
    return grads


def center_output_bias(net: Network, x: Matrix, targets: Matrix) -> Network:
    """Shift the output bias so the mean prediction on ``x`` equals the mean target.

    This is the least-squares optimal output bias for the current hidden
    layers; starting there keeps the first optimizer steps from being spent
    (and hidden units saturated) on the raw dB offset of the targets.
    """
    pred = predict(net, x)
    n = targets.rows
    if n == 0 or pred.shape != targets.shape:
        raise ShapeError(f"center_output_bias: predictions {pred.shape} vs targets {targets.shape}")
    shift = (math.fsum(targets.data) - math.fsum(pred.data)) / n
    w = net.weights[-1]
    body, bias = _split_bias(w)
    new_last = vstack(body, Matrix.row([bias[0, 0] + shift]))
    return Network(net.config, net.weights[:-1] + (new_last,))


def flatten(net: Network) -> array:
    out = array("d")
    for w in net.weights:
        out.extend(w.data)
    return out


def flatten_matrices(mats: Sequence[Matrix]) -> array:
    out = array("d")
    for m in mats:
        out.extend(m.data)
    return out


def unflatten(config: NetworkConfig, params: Sequence[float]) -> Network:
    if len(params) != config.parameter_count:
        raise ShapeError(
            f"unflatten: vector has {len(params)} entries, network needs {config.parameter_count}"
        )
    weights = []
    pos = 0
    for rows, cols in config.weight_shapes:
        size = rows * cols
        weights.append(Matrix(rows, cols, params[pos:pos + size]))
        pos += size
    return Network(config, tuple(weights))
