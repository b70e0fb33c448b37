"""One-hidden-layer softmax network trained by mini-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from penscore.scoring import DomainError

PARAM_NAMES = ("W1", "b1", "W2", "b2")


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class HyperParams:
    epochs: int = 100
    learning_rate: float = 0.05
    hidden_units: int = 32
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise DomainError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise DomainError("learning_rate must be > 0")
        if self.hidden_units < 1 or self.batch_size < 1:
            raise DomainError("hidden_units and batch_size must be >= 1")


def init_params(rng: np.random.Generator, n_in: int, n_hidden: int, n_out: int) -> dict:
    return {
        "W1": rng.standard_normal((n_in, n_hidden)) / np.sqrt(n_in),
        "b1": np.zeros(n_hidden),
        "W2": rng.standard_normal((n_hidden, n_out)) / np.sqrt(n_hidden),
        "b2": np.zeros(n_out),
    }


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params: dict, X: np.ndarray) -> np.ndarray:
    h = np.tanh(X @ params["W1"] + params["b1"])
    return softmax(h @ params["W2"] + params["b2"])


def loss_and_grad(params: dict, X: np.ndarray, Y: np.ndarray) -> tuple[float, dict]:
    """Mean cross-entropy over the batch and its gradient."""
    n = X.shape[0]
    h = np.tanh(X @ params["W1"] + params["b1"])
    logits = h @ params["W2"] + params["b2"]
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -np.sum(Y * logp) / n
    dlogits = (np.exp(logp) - Y) / n
    dh = dlogits @ params["W2"].T * (1 - h**2)
    grads = {
        "W2": h.T @ dlogits,
        "b2": dlogits.sum(axis=0),
        "W1": X.T @ dh,
        "b1": dh.sum(axis=0),
    }
    return float(loss), grads


def gradient_check(params: dict, X: np.ndarray, Y: np.ndarray, step: float = 1e-6) -> dict:
    """Largest relative error between analytic and central-difference gradients,
    per parameter tensor."""
    _, grads = loss_and_grad(params, X, Y)
    errors = {}
    for name in PARAM_NAMES:
        p = params[name]
        num = np.zeros_like(p)
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + step
            up, _ = loss_and_grad(params, X, Y)
            p[i] = old - step
            down, _ = loss_and_grad(params, X, Y)
            p[i] = old
            num[i] = (up - down) / (2 * step)
        scale = np.maximum(np.abs(num) + np.abs(grads[name]), 1e-8)
        errors[name] = float(np.max(np.abs(num - grads[name]) / scale))
    return errors


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        sd = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


def sgd_epoch(params: dict, X: np.ndarray, Y: np.ndarray, hp: HyperParams,
              rng: np.random.Generator, epoch: int) -> float:
    """One shuffled pass of plain mini-batch gradient descent; returns mean loss."""
    order = rng.permutation(X.shape[0])
    total = 0.0
    for start in range(0, order.size, hp.batch_size):
        batch = order[start : start + hp.batch_size]
        loss, grads = loss_and_grad(params, X[batch], Y[batch])
        if not np.isfinite(loss):
            raise TrainingError(
                f"non-finite loss {loss} at epoch {epoch}, batch offset {start} "
                f"(learning_rate={hp.learning_rate})"
            )
        for name in PARAM_NAMES:
            params[name] -= hp.learning_rate * grads[name]
        total += loss * batch.size
    return total / order.size
