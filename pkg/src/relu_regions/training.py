"""Mini-batch Adam training of ReLU MLPs, written against plain numpy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DivergenceError, ShapeError
from .network import Network, forward


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 128
    epochs: float = 1
    loss: str = "cross-entropy"
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    checkpoints: tuple = (0.0,)
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("lr and batch_size must be positive, epochs non-negative")
        if self.loss not in ("cross-entropy", "mse"):
            raise ValueError(f"unknown loss {self.loss!r}")
        cps = tuple(float(c) for c in self.checkpoints)
        if list(cps) != sorted(cps) or (cps and (cps[0] < 0 or cps[-1] > self.epochs)):
            raise ValueError("checkpoint schedule must be sorted and within [0, epochs]")
        object.__setattr__(self, "checkpoints", cps)


@dataclass
class Checkpoint:
    epoch: float
    step: int
    accuracy: float
    loss: float
    network: Network


@dataclass
class TrainTrace:
    checkpoints: list = field(default_factory=list)
    epoch_losses: list = field(default_factory=list)

    def to_rows(self):
        return [{"epoch": c.epoch, "accuracy": c.accuracy, "loss": c.loss} for c in self.checkpoints]


def _targets(net, labels, loss):
    if loss == "cross-entropy" or (net.output_dim > 1 and np.issubdtype(labels.dtype, np.integer)):
        t = np.zeros((len(labels), net.output_dim))
        t[np.arange(len(labels)), labels.astype(np.int64)] = 1.0
        return t
    return np.asarray(labels, dtype=np.float64).reshape(len(labels), -1)


def loss_and_grads(net: Network, x, labels, loss="cross-entropy"):
    """Mean loss over the batch and its gradient for every parameter array.

    Gradients follow ``net.params()`` order (W1, b1, W2, b2, ...).  The ReLU
    derivative at exactly zero is taken to be 0.
    """
    hs = [np.asarray(x, dtype=np.float64)]
    pres = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = hs[-1] @ w.T + b
        pres.append(z)
        hs.append(np.maximum(z, 0.0))
    out = hs[-1] @ net.weights[-1].T + net.biases[-1]
    n = len(out)
    t = _targets(net, labels, loss)
    if loss == "cross-entropy":
        shifted = out - out.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        value = -np.sum(t * logp) / n
        delta = (np.exp(logp) - t) / n
    else:
        diff = out - t
        value = 0.5 * np.sum(diff ** 2) / n
        delta = diff / n
    grads = [None] * (2 * len(net.weights))
    for l in range(len(net.weights) - 1, -1, -1):
        grads[2 * l] = delta.T @ hs[l]
        grads[2 * l + 1] = delta.sum(axis=0)
        if l:
            delta = (delta @ net.weights[l]) * (pres[l - 1] > 0)
    return float(value), grads


def accuracy(net: Network, ds: Dataset) -> float:
    out = net(ds.inputs)
    if net.output_dim == 1:
        pred = (out[:, 0] > 0.5).astype(np.int64)
    else:
        pred = out.argmax(axis=1)
    return float(np.mean(pred == ds.labels))


def _from_flat(net, params):
    return net.replace(weights=params[0::2], biases=params[1::2])


class Adam:
    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, betas[0], betas[1], eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        out = []
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            out.append(p - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps))
        return out


def train(net: Network, ds: Dataset, cfg: TrainConfig, hook=None) -> TrainTrace:
    """Train with shuffled mini-batches; ``hook(checkpoint)`` fires at each scheduled epoch.

    Checkpoint epochs may be fractional; they are rounded to the nearest
    optimisation step.  Snapshots are immutable networks.
    """
    if ds.input_dim != net.input_dim:
        raise ShapeError(f"dataset dim {ds.input_dim} != network input dim {net.input_dim}")
    n = len(ds)
    steps_per_epoch = max(1, math.ceil(n / cfg.batch_size))
    total = int(round(cfg.epochs * steps_per_epoch))
    due = [(int(round(e * steps_per_epoch)), e) for e in cfg.checkpoints]
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x747261]))
    params = [p.copy() for p in net.params()]
    opt = Adam(params, cfg.lr, cfg.betas, cfg.eps)
    trace = TrainTrace()

    def checkpoint(step, epoch):
        snap = _from_flat(net, params)
        value, _ = loss_and_grads(snap, ds.inputs, ds.labels, cfg.loss)
        cp = Checkpoint(epoch, step, accuracy(snap, ds), value, snap)
        trace.checkpoints.append(cp)
        if hook is not None:
            hook(cp)

    step = 0
    di = 0
    while di < len(due) and due[di][0] <= 0:
        checkpoint(0, due[di][1])
        di += 1
    epoch_loss = []
    order = rng.permutation(n)
    while step < total:
        pos = (step % steps_per_epoch) * cfg.batch_size
        batch = order[pos:pos + cfg.batch_size]
        value, grads = loss_and_grads(_from_flat(net, params), ds.inputs[batch], ds.labels[batch], cfg.loss)
        if not math.isfinite(value):
            raise DivergenceError(f"loss became {value} at step {step}", epoch=step / steps_per_epoch)
        params = opt.step(params, grads)
        epoch_loss.append(value)
        step += 1
        if step % steps_per_epoch == 0:
            trace.epoch_losses.append(float(np.mean(epoch_loss)))
            epoch_loss = []
            order = rng.permutation(n)
        while di < len(due) and due[di][0] <= step:
            checkpoint(step, due[di][1])
            di += 1
    if not all(np.all(np.isfinite(p)) for p in params):
        raise DivergenceError("parameters became non-finite", epoch=step / steps_per_epoch)
    while di < len(due):
        checkpoint(step, due[di][1])
        di += 1
    return trace


def finite_difference_gradcheck(net: Network, ds: Dataset, n_probes: int, loss="cross-entropy",
                                seed=0, rel_h=1e-5, floor=1e-7, return_details=False):
    """Largest relative error between backprop and central differences over random parameters.

    A probe whose +-h perturbation changes any activation on the data sits on
    a kink and is replaced by another draw.
    """
    rng = np.random.default_rng(seed)
    params = net.params()
    _, grads = loss_and_grads(net, ds.inputs, ds.labels, loss)
    sizes = np.array([p.size for p in params])
    _, base_pre = forward(net, ds.inputs)
    base_pat = base_pre > 0
    errors, skipped = [], 0
    while len(errors) < n_probes:
        if skipped > 50 * n_probes:
            break
        a = int(rng.choice(len(params), p=sizes / sizes.sum()))
        i = int(rng.integers(params[a].size))
        theta = params[a].flat[i]
        h = rel_h * max(1.0, abs(theta))
        vals = []
        kink = False
        for sgn in (1, -1):
            ps = [p.copy() for p in params]
            ps[a].flat[i] = theta + sgn * h
            trial = _from_flat(net, ps)
            _, pre = forward(trial, ds.inputs)
            if np.any((pre > 0) != base_pat):
                kink = True
                break
            vals.append(loss_and_grads(trial, ds.inputs, ds.labels, loss)[0])
        if kink:
            skipped += 1
            continue
        fd = (vals[0] - vals[1]) / (2 * h)
        bp = grads[a].flat[i]
        errors.append(abs(fd - bp) / max(abs(fd), abs(bp), floor))
    worst = float(max(errors)) if errors else float("nan")
    if return_details:
        return worst, {"probes": len(errors), "skipped_kinks": skipped}
    return worst
