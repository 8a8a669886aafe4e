"""Round-level keep/filter decision from the stored Max-JD scores.

Two rules are combined:

* threshold: keep a client whose score is strictly below the round average;
* duplicate: keep a client whose score is not shared (within ``dup_epsilon``)
  by any other client in the round.

A round with a single client has no peers to compare against; it is kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidInputError

FilterMode = Literal["combined", "threshold_only", "duplicate_only"]
FILTER_MODES = ("combined", "threshold_only", "duplicate_only")


@dataclass(frozen=True)
class FilterConfig:
    dup_epsilon: float = 1e-9
    mode: FilterMode = "combined"

    def __post_init__(self):
        if not np.isfinite(self.dup_epsilon) or self.dup_epsilon < 0:
            raise InvalidInputError("dup_epsilon must be finite and >= 0")
        if self.mode not in FILTER_MODES:
            raise InvalidInputError(f"unknown filter mode {self.mode!r}")


def below_average(scores: np.ndarray) -> np.ndarray:
    return scores < scores.sum() / scores.size


def unique_scores(scores: np.ndarray, eps: float) -> np.ndarray:
    """True where no other score lies within ``eps``."""
    order = np.argsort(scores, kind="stable")
    gaps = np.diff(scores[order])
    close = gaps <= eps
    dup_sorted = np.zeros(scores.size, dtype=bool)
    dup_sorted[:-1] |= close
    dup_sorted[1:] |= close
    unique = np.empty(scores.size, dtype=bool)
    unique[order] = ~dup_sorted
    return unique


def detect_filter(max_jd_stored, cfg: FilterConfig = FilterConfig()) -> np.ndarray:
    """Boolean keep-mask aligned with ``max_jd_stored``."""
    scores = np.asarray(max_jd_stored, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise InvalidInputError("need at least one Max-JD score")
    if scores.size == 1:
        return np.ones(1, dtype=bool)
    if cfg.mode == "threshold_only":
        return below_average(scores)
    if cfg.mode == "duplicate_only":
        return unique_scores(scores, cfg.dup_epsilon)
    return below_average(scores) & unique_scores(scores, cfg.dup_epsilon)
