"""Fully-connected ReLU networks.

Sign convention, used by every module in the package: the pre-activation of
hidden neuron ``z`` is ``W[z] @ h_prev + b[z]`` and the neuron is *on* iff that
value is strictly positive.  (A threshold written as ``z(x) - b_z > 0`` maps to
this form with the stored bias equal to ``-b_z``.)  The last layer is an
affine read-out with no ReLU; only hidden neurons carry a pattern sign.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BoundaryPointError,
    InvalidArchitectureError,
    InvalidScaleError,
    PreconditionError,
    ShapeError,
)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class InitSpec:
    weight_scale: float = 1.0
    bias_std: float = 1e-3
    seed: int = 0


class Network:
    """Immutable ReLU MLP.

    ``layer_widths`` lists the hidden widths followed by the output width.
    ``weights[l]`` has shape ``(n_l, n_{l-1})`` with ``n_0 = input_dim``.
    """

    __slots__ = ("input_dim", "layer_widths", "weights", "biases")

    def __init__(self, input_dim, layer_widths, weights, biases):
        input_dim = int(input_dim)
        layer_widths = tuple(int(w) for w in layer_widths)
        if input_dim < 1 or not layer_widths or min(layer_widths) < 1:
            raise InvalidArchitectureError(
                f"widths must be positive: input_dim={input_dim}, widths={layer_widths}")
        if len(weights) != len(layer_widths) or len(biases) != len(layer_widths):
            raise InvalidArchitectureError("one weight matrix and bias vector per layer")
        ws, bs = [], []
        fan_in = input_dim
        for l, (w, b, n) in enumerate(zip(weights, biases, layer_widths)):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64).reshape(-1)
            if w.shape != (n, fan_in) or b.shape != (n,):
                raise ShapeError(
                    f"layer {l}: expected W {(n, fan_in)}, b {(n,)}; got {w.shape}, {b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} has non-finite parameters")
            w.setflags(write=False)
            b.setflags(write=False)
            ws.append(w)
            bs.append(b)
            fan_in = n
        object.__setattr__(self, "input_dim", input_dim)
        object.__setattr__(self, "layer_widths", layer_widths)
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))

    def __setattr__(self, name, value):
        raise AttributeError("Network is immutable")

    def __repr__(self):
        return f"Network(input_dim={self.input_dim}, widths={list(self.layer_widths)})"

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return self.layer_widths[:-1]

    @property
    def depth(self) -> int:
        """Number of hidden layers."""
        return len(self.layer_widths) - 1

    @property
    def n_neurons(self) -> int:
        return int(sum(self.hidden_widths))

    @property
    def output_dim(self) -> int:
        return self.layer_widths[-1]

    def layer_slices(self) -> list[slice]:
        """Index ranges of each hidden layer inside a layer-major pattern."""
        out, start = [], 0
        for n in self.hidden_widths:
            out.append(slice(start, start + n))
            start += n
        return out

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def replace(self, weights=None, biases=None) -> "Network":
        return Network(
            self.input_dim, self.layer_widths,
            self.weights if weights is None else weights,
            self.biases if biases is None else biases,
        )

    def __call__(self, x):
        return forward(self, x)[0]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.input_dim == other.input_dim
                and self.layer_widths == other.layer_widths
                and all(np.array_equal(a, b) for a, b in zip(self.params(), other.params())))

    __hash__ = None


def he_init(input_dim: int, layer_widths: Sequence[int], spec: InitSpec = InitSpec()) -> Network:
    """Normal weights with variance ``weight_scale**2 * 2 / fan_in``, normal biases.

    Each layer draws from its own stream keyed by ``(seed, layer)``, so growing
    the network never reshuffles the layers that were already there.
    """
    widths = [int(w) for w in layer_widths]
    if input_dim < 1 or not widths or min(widths) < 1:
        raise InvalidArchitectureError(f"invalid architecture {input_dim} -> {widths}")
    if spec.bias_std < 0 or spec.weight_scale <= 0:
        raise ValueError("bias_std must be >= 0 and weight_scale > 0")
    weights, biases = [], []
    fan_in = int(input_dim)
    for l, n in enumerate(widths):
        rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed) & (2**64 - 1), l]))
        std = spec.weight_scale * np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(n, fan_in)))
        if spec.bias_std == 0:
            biases.append(np.zeros(n))
        else:
            biases.append(rng.normal(0.0, spec.bias_std, size=n))
        fan_in = n
    return Network(input_dim, widths, weights, biases)


def _as_batch(net: Network, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xb = x.reshape(1, -1) if single else x
    if xb.ndim != 2 or xb.shape[1] != net.input_dim:
        raise ShapeError(f"expected input of dimension {net.input_dim}, got shape {x.shape}")
    return xb, single


def forward(net: Network, x):
    """Return ``(output, preactivations)``.

    Works on a single vector or a batch of row vectors; pre-activations are
    concatenated layer-major over hidden neurons.
    """
    h, single = _as_batch(net, x)
    pre = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ w.T + b
        pre.append(z)
        h = np.maximum(z, 0.0)
    out = h @ net.weights[-1].T + net.biases[-1]
    pre = np.concatenate(pre, axis=1) if pre else np.zeros((h.shape[0], 0))
    if single:
        return out[0], pre[0]
    return out, pre


def pattern_at(net: Network, x) -> np.ndarray:
    """Activation pattern (+1/-1 per hidden neuron) at ``x``.

    Raises ``BoundaryPointError`` when some pre-activation is within the tie
    tolerance of zero.
    """
    x = np.asarray(x, dtype=np.float64)
    _, pre = forward(net, x)
    tol = TIE_TOL * (1.0 + np.max(np.abs(x), axis=-1, initial=0.0))
    tol = np.asarray(tol)[..., None] if pre.ndim == 2 else tol
    close = np.abs(pre) <= tol
    if np.any(close):
        idx = np.argwhere(close)[0]
        raise BoundaryPointError(f"pre-activation of neuron {idx[-1]} is on its threshold",
                                 neuron=int(idx[-1]))
    return np.where(pre > 0, 1, -1).astype(np.int8)


def cell_affine_map(net: Network, pattern) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``x -> G @ x + c`` computed on the region with ``pattern``.

    ``G`` has shape ``(n_out, input_dim)``: one input-space gradient per output.
    """
    pattern = np.asarray(pattern)
    if pattern.shape != (net.n_neurons,):
        raise ShapeError(f"pattern must have length {net.n_neurons}")
    G = np.eye(net.input_dim)
    c = np.zeros(net.input_dim)
    for sl, w, b in zip(net.layer_slices(), net.weights[:-1], net.biases[:-1]):
        on = (pattern[sl] > 0).astype(np.float64)
        G = on[:, None] * (w @ G)
        c = on * (w @ c + b)
    return net.weights[-1] @ G, net.weights[-1] @ c + net.biases[-1]


def _check_scale(c):
    if not np.isfinite(c) or c <= 0:
        raise InvalidScaleError(f"scale must be a positive real, got {c}")


def scale_biases(net: Network, c: float) -> Network:
    """Multiply every bias (output layer included) by ``c``; ``N(x) == N_c(c x) / c``."""
    _check_scale(c)
    return net.replace(biases=[c * b for b in net.biases])


def scale_weights(net: Network, c: float) -> Network:
    _check_scale(c)
    return net.replace(weights=[c * w for w in net.weights])


def layerwise_scale_biases(net: Network, c: float) -> Network:
    """Divide the biases of affine layer ``k`` (1-based, output included) by ``c**k``.

    With ``L = depth + 1`` affine layers, ``scale_weights(N, c)(x) ==
    c**L * layerwise_scale_biases(N, c)(x)`` and both have the same patterns.
    """
    _check_scale(c)
    return net.replace(biases=[b / c ** (k + 1) for k, b in enumerate(net.biases)])


def zero_bias_equivariance_check(net: Network, x, c: float) -> bool:
    if any(np.any(b != 0) for b in net.biases):
        raise PreconditionError("network has nonzero biases")
    _check_scale(c)
    x = np.asarray(x, dtype=np.float64)
    y, pre = forward(net, x)
    yc, pre_c = forward(net, c * x)
    if np.max(np.abs(yc - c * y)) > 1e-9 * (1.0 + np.max(np.abs(c * y))):
        return False
    # a fully-off layer makes every later pre-activation exactly 0 for both
    # inputs, so compare the raw "> 0" masks instead of raising on the tie
    return bool(np.array_equal(pre > 0, pre_c > 0))


def to_json(net: Network) -> dict:
    return {
        "input_dim": net.input_dim,
        "widths": list(net.layer_widths),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def from_json(doc: dict) -> Network:
    return Network(doc["input_dim"], doc["widths"], doc["weights"], doc["biases"])


def save(net: Network, path) -> None:
    Path(path).write_text(json.dumps(to_json(net)))


def load(path) -> Network:
    return from_json(json.loads(Path(path).read_text()))
