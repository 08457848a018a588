"""Multilayer perceptron trained by backpropagation on cross-entropy loss.

Plain numpy implementation: ReLU hidden layers, softmax output, mini-batch
gradient descent with classical momentum. Weight init and batch shuffling are
driven by a single seed, so equal configs give bit-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..dataset import N_CLASSES
from ..errors import DimensionMismatch, EmptyBatch, EmptyTrainingSet


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (64, 64)
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    momentum: float = 0.9
    seed: int = 0


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class MlpClassifier:
    def __init__(self, config: MlpConfig = MlpConfig()):
        self.config = config
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        self._dim: int | None = None

    @property
    def is_fitted(self) -> bool:
        return self._dim is not None

    def _init_params(self, dim: int) -> None:
        rng = np.random.default_rng(self.config.seed)
        sizes = [dim, *self.config.hidden, N_CLASSES]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self._dim = dim

    def _check_dim(self, d: int) -> None:
        if d != self._dim:
            raise DimensionMismatch(f"expected {self._dim} features, got {d}")

    def _forward(self, X: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; last entry is the softmax output."""
        acts = [X]
        for layer, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ W + b
            if layer < len(self.weights) - 1:
                acts.append(np.maximum(z, 0.0))
            else:
                acts.append(_softmax(z))
        return acts

    def gradients(self, X: np.ndarray, y: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Analytic gradients of mean cross-entropy wrt every weight and bias."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        if len(X) == 0:
            raise EmptyBatch("gradient needs a non-empty batch")
        self._check_dim(X.shape[1])
        acts = self._forward(X)
        n = len(X)
        delta = acts[-1].copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        for layer in range(len(self.weights) - 1, -1, -1):
            grads[layer] = (acts[layer].T @ delta, delta.sum(axis=0))
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (acts[layer] > 0)
        return grads

    def loss(self, X: np.ndarray, y: np.ndarray) -> float:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        probs = self._forward(X)[-1]
        return float(-np.mean(np.log(probs[np.arange(len(X)), y] + 1e-300)))

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MlpClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrainingSet("mlp needs at least one training sample")
        self._init_params(X.shape[1])
        cfg = self.config
        rng = np.random.default_rng([cfg.seed, 1])
        velocity = [
            (np.zeros_like(W), np.zeros_like(b))
            for W, b in zip(self.weights, self.biases)
        ]
        for _ in range(cfg.epochs):
            order = rng.permutation(len(X))
            for start in range(0, len(X), cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                grads = self.gradients(X[batch], y[batch])
                for layer, (gW, gb) in enumerate(grads):
                    vW, vb = velocity[layer]
                    vW *= cfg.momentum
                    vW -= cfg.learning_rate * gW
                    vb *= cfg.momentum
                    vb -= cfg.learning_rate * gb
                    self.weights[layer] += vW
                    self.biases[layer] += vb
        return self

    def predict_proba(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        self._check_dim(queries.shape[1])
        return self._forward(queries)[-1]

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return self.predict_proba(queries).argmax(axis=1)

    def predict_one(self, query: np.ndarray) -> int:
        return int(self.predict(np.asarray(query, dtype=float)[None, :])[0])

    def with_seed(self, seed: int) -> "MlpClassifier":
        """Unfitted copy whose init and shuffling derive from ``seed``."""
        return MlpClassifier(replace(self.config, seed=seed))
