"""Minimal feed-forward network with reverse-mode gradients and Adam.

Backbone for the dynamics networks, the plain autoencoder, and the VAE.
Arrays only; no external tensor framework, so finite-difference gradient
checks exercise the real implementation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "identity")

WEIGHT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    step_size: float = 1e-3
    batch_size: int = 64
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    rng_seed: int = 0

    def __post_init__(self):
        if self.step_size < 0.0:
            raise ValueError("step_size must be non-negative")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("moment decay rates must lie in (0, 1)")


class Mlp:
    """Fully connected layers; per-layer activation tag ('relu' | 'identity')."""

    def __init__(self, weights, biases, activations):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activations = list(activations)
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("weights, biases, and activations must have equal length")
        for w, b in zip(self.weights, self.biases):
            if w.shape[1] != b.shape[0]:
                raise ValueError("bias length must match weight output dimension")
        for w1, w2 in zip(self.weights, self.weights[1:]):
            if w1.shape[1] != w2.shape[0]:
                raise ValueError("consecutive layer dimensions are inconsistent")
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")

    @classmethod
    def init(cls, layer_dims, activations, rng_seed: int = 0) -> "Mlp":
        """He-style fan-in scaled uniform initialization, seeded."""
        if len(activations) != len(layer_dims) - 1:
            raise ValueError("need one activation per layer transition")
        rng = np.random.default_rng(rng_seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims, layer_dims[1:]):
            bound = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, activations)

    @property
    def layer_dims(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def forward(self, x):
        """Evaluate on a single vector or a batch of rows."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out, _ = self.forward_cached(np.atleast_2d(x))
        return out[0] if single else out

    def forward_cached(self, x: np.ndarray):
        """Batch forward pass keeping the per-layer inputs for backward."""
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dimension {self.input_dim}, got {x.shape[1]}")
        layer_inputs = []
        h = x
        for w, b, act in zip(self.weights, self.biases, self.activations):
            layer_inputs.append(h)
            z = h @ w + b
            h = np.maximum(z, 0.0) if act == "relu" else z
        return h, layer_inputs

    def backward(self, layer_inputs, grad_output):
        """Reverse-mode gradients from d(loss)/d(output).

        Returns ((weight_grads, bias_grads), grad_input); gradients are
        summed over the batch.
        """
        grad = np.atleast_2d(np.asarray(grad_output, dtype=float))
        w_grads = [None] * len(self.weights)
        b_grads = [None] * len(self.weights)
        for i in reversed(range(len(self.weights))):
            h = layer_inputs[i]
            if self.activations[i] == "relu":
                z = h @ self.weights[i] + self.biases[i]
                grad = grad * (z > 0.0)
            w_grads[i] = h.T @ grad
            b_grads[i] = grad.sum(axis=0)
            grad = grad @ self.weights[i].T
        return (w_grads, b_grads), grad

    def checksum(self) -> float:
        """Order-sensitive digest of all weights; detects any mutation."""
        total = 0.0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            total += float(np.sum(w * (i + 1))) + float(np.sum(b * (i + 1) * 0.5))
        return total

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                   list(self.activations))

    def save(self, path) -> None:
        arrays = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        manifest = {
            "format_version": WEIGHT_FORMAT_VERSION,
            "layer_dims": self.layer_dims,
            "activations": self.activations,
        }
        arrays["manifest"] = np.array(json.dumps(manifest))
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path) -> "Mlp":
        with np.load(path) as data:
            manifest = json.loads(str(data["manifest"]))
            if manifest["format_version"] != WEIGHT_FORMAT_VERSION:
                raise ValueError(f"unsupported weight format {manifest['format_version']}")
            n = len(manifest["activations"])
            weights = [data[f"w{i}"] for i in range(n)]
            biases = [data[f"b{i}"] for i in range(n)]
            return cls(weights, biases, manifest["activations"])


class Adam:
    """Adaptive-moment SGD state for one Mlp."""

    def __init__(self, net: Mlp, config: TrainConfig):
        self.config = config
        self.m_w = [np.zeros_like(w) for w in net.weights]
        self.v_w = [np.zeros_like(w) for w in net.weights]
        self.m_b = [np.zeros_like(b) for b in net.biases]
        self.v_b = [np.zeros_like(b) for b in net.biases]
        self.t = 0
        self.eps = 1e-8

    def step(self, net: Mlp, w_grads, b_grads) -> None:
        c = self.config
        self.t += 1
        lr = c.step_size * np.sqrt(1.0 - c.beta2**self.t) / (1.0 - c.beta1**self.t)
        for i in range(len(net.weights)):
            self.m_w[i] = c.beta1 * self.m_w[i] + (1 - c.beta1) * w_grads[i]
            self.v_w[i] = c.beta2 * self.v_w[i] + (1 - c.beta2) * w_grads[i] ** 2
            net.weights[i] -= lr * self.m_w[i] / (np.sqrt(self.v_w[i]) + self.eps)
            self.m_b[i] = c.beta1 * self.m_b[i] + (1 - c.beta1) * b_grads[i]
            self.v_b[i] = c.beta2 * self.v_b[i] + (1 - c.beta2) * b_grads[i] ** 2
            net.biases[i] -= lr * self.m_b[i] / (np.sqrt(self.v_b[i]) + self.eps)


class TrainingDiverged(RuntimeError):
    pass


def train(net: Mlp, inputs, targets, config: TrainConfig):
    """Minibatch squared-error training in place; returns per-epoch mean loss."""
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.atleast_2d(np.asarray(targets, dtype=float))
    if len(x) != len(y) or len(x) == 0:
        raise ValueError("inputs and targets must be nonempty and aligned")
    rng = np.random.default_rng(config.rng_seed)
    opt = Adam(net, config)
    curve = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(x))
        epoch_loss = 0.0
        for start in range(0, len(x), config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            out, cache = net.forward_cached(xb)
            resid = out - yb
            loss = float(np.mean(np.sum(resid**2, axis=1)))
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch starting {start}"
                )
            (w_grads, b_grads), _ = net.backward(cache, 2.0 * resid / len(xb))
            opt.step(net, w_grads, b_grads)
            epoch_loss += loss * len(xb)
        curve.append(epoch_loss / len(x))
    return curve
