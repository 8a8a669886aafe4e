"""Two-layer tanh perceptron trained with mini-batch SGD on softmax cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import Dataset
from .errors import InvalidInputError

# extra objective term: flat weights -> (loss, flat gradient)
Regularizer = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass(frozen=True)
class TrainHyper:
    learning_rate: float = 0.1
    epochs: int = 2
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0 or self.epochs < 1 or self.batch_size < 1:
            raise InvalidInputError("learning_rate >= 0, epochs >= 1, batch_size >= 1 required")


@dataclass(frozen=True)
class TinyModel:
    w1: np.ndarray  # (input_dim, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, n_classes)
    b2: np.ndarray

    @classmethod
    def init(cls, input_dim: int, hidden: int, n_classes: int, rng: np.random.Generator) -> "TinyModel":
        return cls(
            rng.normal(0.0, 1.0 / np.sqrt(input_dim), size=(input_dim, hidden)),
            np.zeros(hidden),
            rng.normal(0.0, 1.0 / np.sqrt(hidden), size=(hidden, n_classes)),
            np.zeros(n_classes),
        )

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]

    @property
    def size(self) -> int:
        d, h, c = self.dims
        return d * h + h + h * c + c

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2.ravel(), self.b2])

    @classmethod
    def unflatten(cls, vec, dims: tuple[int, int, int]) -> "TinyModel":
        d, h, c = dims
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != d * h + h + h * c + c:
            raise InvalidInputError(f"flat vector of length {vec.size} does not fit dims {dims}")
        i = 0
        parts = []
        for shape in ((d, h), (h,), (h, c), (c,)):
            k = int(np.prod(shape))
            parts.append(vec[i:i + k].reshape(shape).copy())
            i += k
        return cls(*parts)

    def logits(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x @ self.w1 + self.b1) @ self.w2 + self.b2

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def loss_and_grad(model: TinyModel, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the flat weights."""
    hidden = np.tanh(x @ model.w1 + model.b1)
    logp = _log_softmax(hidden @ model.w2 + model.b2)
    n = x.shape[0]
    loss = -float(np.mean(logp[np.arange(n), y]))
    dz = np.exp(logp)
    dz[np.arange(n), y] -= 1.0
    dz /= n
    dw2 = hidden.T @ dz
    db2 = dz.sum(axis=0)
    dh = (dz @ model.w2.T) * (1.0 - hidden * hidden)
    dw1 = x.T @ dh
    db1 = dh.sum(axis=0)
    return loss, np.concatenate([dw1.ravel(), db1, dw2.ravel(), db2])


def dataset_loss(model: TinyModel, data: Dataset) -> float:
    return loss_and_grad(model, data.features, data.labels)[0]


def local_train(
    model: TinyModel,
    data: Dataset,
    hyper: TrainHyper,
    regularizer: Regularizer | None = None,
    class_weight: float = 1.0,
) -> TinyModel:
    """Mini-batch SGD on ``class_weight * CE + regularizer``.

    Deterministic given ``hyper.seed``.
    """
    if data.feature_dim != model.dims[0]:
        raise InvalidInputError(
            f"data has {data.feature_dim} features, model expects {model.dims[0]}"
        )
    if len(data) == 0:
        return model
    rng = np.random.default_rng(hyper.seed)
    dims = model.dims
    flat = model.flatten()
    for _ in range(hyper.epochs):
        order = rng.permutation(len(data))
        for start in range(0, len(data), hyper.batch_size):
            idx = order[start:start + hyper.batch_size]
            current = TinyModel.unflatten(flat, dims)
            grad = np.zeros_like(flat)
            if class_weight != 0.0:
                _, g = loss_and_grad(current, data.features[idx], data.labels[idx])
                grad += class_weight * g
            if regularizer is not None:
                grad += regularizer(flat)[1]
            flat = flat - hyper.learning_rate * grad
    return TinyModel.unflatten(flat, dims)
