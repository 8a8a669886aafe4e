"""Synthetic Gaussian-blob datasets and non-IID client partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise InvalidInputError("features must be 2-d and labels 1-d")
        if self.features.shape[0] != self.labels.shape[0]:
            raise InvalidInputError("features and labels have different row counts")
        if self.n_classes < 2:
            raise InvalidInputError("need at least two classes")

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.n_classes)


@dataclass(frozen=True)
class PartitionSpec:
    n_clients: int
    non_iid_degree: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_clients < 2:
            raise InvalidInputError("n_clients must be >= 2")
        if not 0.0 <= self.non_iid_degree <= 1.0:
            raise InvalidInputError("non_iid_degree must lie in [0, 1]")


def blob_centers(n_classes: int, feature_dim: int, class_separation: float, seed: int) -> np.ndarray:
    """Class means on a sphere of radius ``class_separation`` (random directions)."""
    if n_classes < 2 or feature_dim < 2:
        raise InvalidInputError("need n_classes >= 2 and feature_dim >= 2")
    if class_separation < 0:
        raise InvalidInputError("class_separation must be >= 0")
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(n_classes, feature_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return class_separation * directions


def sample_blobs(centers: np.ndarray, n_samples: int, rng: np.random.Generator) -> Dataset:
    """Class-balanced unit-variance samples around ``centers``."""
    n_classes = centers.shape[0]
    if n_samples < n_classes:
        raise InvalidInputError("n_samples must be >= n_classes")
    labels = np.arange(n_samples) % n_classes
    rng.shuffle(labels)
    features = centers[labels] + rng.normal(size=(n_samples, centers.shape[1]))
    return Dataset(features, labels.astype(np.int64), n_classes)


def generate_dataset(
    n_samples: int,
    n_classes: int,
    feature_dim: int,
    class_separation: float,
    seed: int,
) -> Dataset:
    centers = blob_centers(n_classes, feature_dim, class_separation, seed)
    return sample_blobs(centers, n_samples, np.random.default_rng([seed, 1]))


def partition(data: Dataset, spec: PartitionSpec) -> list[Dataset]:
    """Split ``data`` into equally sized client shards.

    Client ``i`` has main class ``i % C``. A fraction ``non_iid_degree`` of its
    shard is drawn from that class; the rest is dealt at random from whatever
    remains. When a class runs out, the shortfall is filled at random.
    """
    n = len(data)
    if spec.n_clients > n:
        raise InvalidInputError(f"{spec.n_clients} clients but only {n} samples")
    rng = np.random.default_rng(spec.seed)
    shard = n // spec.n_clients
    n_main = int(round(spec.non_iid_degree * shard))
    pools = [list(rng.permutation(np.flatnonzero(data.labels == c))) for c in range(data.n_classes)]
    shards: list[list[int]] = []
    for i in range(spec.n_clients):
        pool = pools[i % data.n_classes]
        take = min(n_main, len(pool))
        shards.append(pool[:take])
        del pool[:take]
    rest = rng.permutation(np.concatenate([np.asarray(p, dtype=np.intp) for p in pools]))
    pos = 0
    for idx in shards:
        need = shard - len(idx)
        idx.extend(rest[pos:pos + need].tolist())
        pos += need
    return [data.subset(sorted(idx)) for idx in shards]
