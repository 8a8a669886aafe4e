"""Server-side aggregation rules over flattened updates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import as_vector
from .errors import EmptyAggregationError, InvalidInputError


@dataclass(frozen=True)
class GlobalModel:
    weights: np.ndarray
    round: int = 0


def _stack(updates: Sequence) -> np.ndarray:
    if len(updates) == 0:
        raise EmptyAggregationError("nothing to aggregate")
    vectors = [as_vector(u) for u in updates]
    if len({v.shape for v in vectors}) != 1:
        raise InvalidInputError("updates differ in length")
    return np.stack(vectors)


def fedavg(kept_updates: Sequence, round: int = 0) -> GlobalModel:
    """Equal-weight mean; dataset sizes reported by clients are ignored."""
    return GlobalModel(_stack(kept_updates).mean(axis=0), round)


def coordinate_median(updates: Sequence, round: int = 0) -> GlobalModel:
    return GlobalModel(np.median(_stack(updates), axis=0), round)


def trimmed_mean(updates: Sequence, trim_fraction: float, round: int = 0) -> GlobalModel:
    """Drop ``floor(trim_fraction * n)`` values from each tail per coordinate."""
    if not 0.0 <= trim_fraction < 0.5:
        raise InvalidInputError("trim_fraction must lie in [0, 0.5)")
    stacked = _stack(updates)
    n = stacked.shape[0]
    k = math.floor(trim_fraction * n)
    if n - 2 * k < 1:
        raise InvalidInputError(f"trimming {k} per tail leaves nothing of {n}")
    ordered = np.sort(stacked, axis=0)
    return GlobalModel(ordered[k:n - k].mean(axis=0), round)
