"""Value types passed between the simulator, the attacks and the detector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class FlatUpdate:
    """One client's flattened model weights for one round.

    ``truth_malicious`` is ground truth for metrics only; the detector never
    reads it.
    """

    client_id: int
    round: int
    weights: np.ndarray = field(repr=False)
    truth_malicious: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise InvalidInputError("weights must be a non-empty 1-d vector")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError(f"client {self.client_id}: non-finite weights")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


def as_vector(update) -> np.ndarray:
    """Accept a FlatUpdate or anything array-like; return a float64 vector."""
    if isinstance(update, FlatUpdate):
        return update.weights
    return np.asarray(update, dtype=np.float64)
