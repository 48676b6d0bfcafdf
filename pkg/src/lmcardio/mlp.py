"""Multilayer perceptron f(x, beta) with a residual Jacobian for LM training.

Parameters are flattened layer by layer: the weight matrix of a layer in
row-major order (fan_out x fan_in), followed by its bias vector.

The Jacobian follows the sign convention ``J = df/dbeta`` while residuals are
``r = y - f``, so the damped normal equations read ``(lam*D + J'J) delta = J'r``.
"""
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, as_vector

HIDDEN_ACTIVATIONS = ("sigmoid", "tanh")
OUTPUT_ACTIVATIONS = ("sigmoid", "linear")


def sigmoid(z):
    # tanh form avoids overflow in exp for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _activate(name, z):
    if name == "sigmoid":
        return sigmoid(z)
    if name == "tanh":
        return np.tanh(z)
    return z


def _derivative(name, a):
    """Derivative of the activation, expressed through its output ``a``."""
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(a)


@dataclass(frozen=True)
class Architecture:
    """Everything about a model except its parameter values."""

    layer_sizes: tuple
    hidden_activation: str = "sigmoid"
    output_activation: str = "sigmoid"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"invalid architecture: layer sizes {list(sizes)}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @property
    def n_params(self):
        s = self.layer_sizes
        return sum(s[l + 1] * (s[l] + 1) for l in range(len(s) - 1))

    @property
    def n_inputs(self):
        return self.layer_sizes[0]

    @property
    def n_outputs(self):
        return self.layer_sizes[-1]

    def activation(self, layer):
        last = len(self.layer_sizes) - 2
        return self.output_activation if layer == last else self.hidden_activation


@dataclass(frozen=True, eq=False)
class MlpModel:
    architecture: Architecture
    weights: tuple
    biases: tuple

    def __post_init__(self):
        sizes = self.architecture.layer_sizes
        ws = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.array(b, dtype=np.float64) for b in self.biases)
        if len(ws) != len(sizes) - 1 or len(bs) != len(sizes) - 1:
            raise ValueError("one weight matrix and bias vector per layer required")
        for l, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l} has shapes {w.shape}/{b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} has non-finite parameters")
            w.flags.writeable = False
            b.flags.writeable = False
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def layer_sizes(self):
        return self.architecture.layer_sizes

    def __eq__(self, other):
        if not isinstance(other, MlpModel):
            return NotImplemented
        return self.architecture == other.architecture and np.array_equal(
            flatten(self), flatten(other)
        )


@dataclass(frozen=True)
class InitSpec:
    seed: int = 0
    scheme: str = "uniform_scaled"


def init_model(layer_sizes, spec=InitSpec(), hidden_activation="sigmoid",
               output_activation="sigmoid"):
    """Draw weights uniformly in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases."""
    if spec.scheme != "uniform_scaled":
        raise ValueError(f"unknown init scheme {spec.scheme!r}")
    arch = Architecture(tuple(layer_sizes or ()), hidden_activation, output_activation)
    rng = np.random.default_rng(spec.seed)
    weights, biases = [], []
    sizes = arch.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-s, s, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(arch, weights, biases)


def flatten(model):
    parts = []
    for w, b in zip(model.weights, model.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def unflatten(architecture, beta):
    beta = as_vector(beta, "beta")
    if beta.shape[0] != architecture.n_params:
        raise ValueError(
            f"parameter vector has length {beta.shape[0]}, "
            f"architecture needs {architecture.n_params}"
        )
    sizes = architecture.layer_sizes
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        n = fan_in * fan_out
        weights.append(beta[pos:pos + n].reshape(fan_out, fan_in))
        pos += n
        biases.append(beta[pos:pos + fan_out])
        pos += fan_out
    return MlpModel(architecture, weights, biases)


def _forward_all(model, X):
    """Activations of every layer for a batch, input included."""
    acts = [X]
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        acts.append(_activate(model.architecture.activation(l), acts[-1] @ w.T + b))
    return acts


def predict(model, X):
    """Batch forward pass: rows of X in, rows of outputs back."""
    X = as_matrix(X, "X")
    if X.shape[1] != model.architecture.n_inputs:
        raise ValueError(
            f"input has {X.shape[1]} features, model expects {model.architecture.n_inputs}"
        )
    return _forward_all(model, X)[-1]


def forward(model, x):
    x = as_vector(x, "x")
    return predict(model, x[None, :])[0]


def residual_jacobian(model, X, y):
    """Residuals ``y - f(X)`` and their Jacobian ``df/dbeta``.

    Rows are stacked sample-major: row ``i*m + k`` belongs to output k of
    sample i. Each output unit is back-propagated separately (reverse mode),
    vectorised over samples.
    """
    arch = model.architecture
    X = as_matrix(X, "X")
    y = as_matrix(y, "y")
    a, m = X.shape[0], arch.n_outputs
    if X.shape[1] != arch.n_inputs:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {arch.n_inputs}")
    if y.shape != (a, m):
        raise ValueError(f"y has shape {y.shape}, expected {(a, m)}")

    acts = _forward_all(model, X)
    r = (y - acts[-1]).ravel()

    n_layers = len(model.weights)
    offsets = np.cumsum([0] + [w.size + b.size for w, b in zip(model.weights, model.biases)])
    J = np.zeros((a, m, arch.n_params))
    derivs = [_derivative(arch.activation(l), acts[l + 1]) for l in range(n_layers)]
    for k in range(m):
        # d f_k / d z for the output layer
        delta = np.zeros((a, m))
        delta[:, k] = derivs[-1][:, k]
        for l in range(n_layers - 1, -1, -1):
            w = model.weights[l]
            gw = delta[:, :, None] * acts[l][:, None, :]
            start = offsets[l]
            J[:, k, start:start + w.size] = gw.reshape(a, -1)
            J[:, k, start + w.size:offsets[l + 1]] = delta
            if l > 0:
                delta = (delta @ w) * derivs[l - 1]
    return r, J.reshape(a * m, arch.n_params)


class MlpProblem:
    """Residual provider for fitting an MLP to (X, y) by least squares."""

    def __init__(self, architecture, X, y):
        self.architecture = architecture
        self.X = as_matrix(X, "X")
        y = np.asarray(y, dtype=np.float64)
        self.y = as_matrix(y.reshape(self.X.shape[0], -1), "y")

    def residuals(self, beta):
        model = unflatten(self.architecture, beta)
        return (self.y - predict(model, self.X)).ravel()

    def residual_jacobian(self, beta):
        return residual_jacobian(unflatten(self.architecture, beta), self.X, self.y)
