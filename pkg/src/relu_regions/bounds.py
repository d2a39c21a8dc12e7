"""Closed-form region counts and the gradient-moment estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import Network, forward

LOG_SPACE_FROM = 20


@dataclass(frozen=True)
class BoundParams:
    n_neurons: int
    n_in: int
    T: float = 1.0
    C_bias: float = 1.0
    volume: float = 1.0

    def __post_init__(self):
        if min(self.n_neurons, self.n_in) < 1 or min(self.T, self.C_bias, self.volume) <= 0:
            raise ValueError(f"all bound parameters must be positive: {self}")


@dataclass(frozen=True)
class DensityBound:
    value: float
    log_value: float
    saturated: bool = False

    def __float__(self):
        return self.value


def arrangement_count(m: int, n: int) -> int:
    """Regions cut out of R^n by m hyperplanes in general position."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    return sum(math.comb(m, i) for i in range(min(m, n) + 1))


def density_bound(p: BoundParams) -> DensityBound:
    """Expected activation regions in a window of volume ``p.volume``.

    ``(T * n_neurons)^n_in / n_in!`` per unit volume when ``n_neurons >= n_in``,
    ``2^n_neurons`` otherwise.  Large inputs are evaluated in log space and
    saturate to ``inf`` instead of overflowing.
    """
    if p.n_neurons >= p.n_in:
        log_v = p.n_in * math.log(p.T * p.n_neurons) - math.lgamma(p.n_in + 1)
    else:
        log_v = p.n_neurons * math.log(2.0)
    log_v += math.log(p.volume)
    if p.n_in < LOG_SPACE_FROM and p.n_neurons < 1000:
        if p.n_neurons >= p.n_in:
            v = (p.T * p.n_neurons) ** p.n_in / math.factorial(p.n_in) * p.volume
        else:
            v = 2.0 ** p.n_neurons * p.volume
        return DensityBound(float(v), log_v)
    if log_v > math.log(np.finfo(float).max):
        return DensityBound(math.inf, log_v, saturated=True)
    return DensityBound(math.exp(log_v), log_v)


def expected_count_prediction(n_neurons: int, n_in: int) -> float:
    """Depth-1 leading-order count ``n_neurons^n_in / n_in!``."""
    return n_neurons ** n_in / math.factorial(n_in)


@dataclass
class GradStats:
    mean: np.ndarray
    max: np.ndarray
    moments: dict
    n_samples: int

    def c_grad(self, m=None) -> float:
        """Largest per-neuron m-th moment root (or the max norm if ``m`` is None)."""
        if m is None:
            return float(np.max(self.max))
        return float(np.max(self.moments[m]))


def neuron_gradients(net: Network, x) -> np.ndarray:
    """Input-space gradient of every hidden pre-activation at ``x``: ``(n_neurons, n_in)``."""
    _, pre = forward(net, x)
    grads = []
    J = np.eye(net.input_dim)
    for sl, w in zip(net.layer_slices(), net.weights[:-1]):
        G = w @ J
        grads.append(G)
        J = (pre[sl] > 0)[:, None] * G
    return np.concatenate(grads, axis=0)


def estimate_grad_constant(net_or_sampler, sampler, n_samples: int, moments=(1, 2),
                           seed=0, jitter=1e-9) -> GradStats:
    """Empirical per-neuron statistics of ``|grad z(x)|``.

    ``net_or_sampler`` is either a fixed network or a callable
    ``rng -> Network`` drawing a fresh network per sample; ``sampler`` is a
    callable ``rng -> x``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    norms = []
    for _ in range(n_samples):
        net = net_or_sampler if isinstance(net_or_sampler, Network) else net_or_sampler(rng)
        x = np.asarray(sampler(rng), dtype=np.float64)
        _, pre = forward(net, x)
        for _ in range(10):
            if not np.any(np.abs(pre) <= 1e-12 * (1 + np.max(np.abs(x)))):
                break
            # a neuron that is identically zero never leaves the tie; keep the last draw
            x = x + jitter * rng.standard_normal(x.shape)
            _, pre = forward(net, x)
        norms.append(np.linalg.norm(neuron_gradients(net, x), axis=1))
    norms = np.array(norms)
    return GradStats(
        mean=norms.mean(axis=0),
        max=norms.max(axis=0),
        moments={m: np.mean(norms ** m, axis=0) ** (1.0 / m) for m in moments},
        n_samples=n_samples,
    )


def bounds_table(n_neurons: int, n_in: int, T: float = 1.0, volume: float = 1.0) -> dict:
    return {
        "n_neurons": n_neurons,
        "n_in": n_in,
        "T": T,
        "volume": volume,
        "arrangement_count": arrangement_count(n_neurons, n_in),
        "density_bound": density_bound(BoundParams(n_neurons, n_in, T=T, volume=volume)).value,
        "expected_count_prediction": expected_count_prediction(n_neurons, n_in),
    }
