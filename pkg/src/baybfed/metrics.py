"""Detection rates and model accuracies.

Rates whose denominator is empty are ``None`` and serialise as JSON null.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attacks import TriggerSpec
from .data import Dataset
from .errors import InvalidInputError
from .model import TinyModel


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    tpr: float | None
    tnr: float | None
    ba: float
    ma: float
    kept_count: int


def _masks(kept, truth_malicious) -> tuple[np.ndarray, np.ndarray]:
    kept = np.asarray(kept, dtype=bool)
    truth = np.asarray(truth_malicious, dtype=bool)
    if kept.shape != truth.shape:
        raise InvalidInputError("kept and truth vectors differ in length")
    return kept, truth


def confusion(kept, truth_malicious) -> dict[str, int]:
    """Positive = malicious; a filtered update is a positive verdict."""
    kept, truth = _masks(kept, truth_malicious)
    return {
        "tp": int(np.sum(truth & ~kept)),
        "fn": int(np.sum(truth & kept)),
        "tn": int(np.sum(~truth & kept)),
        "fp": int(np.sum(~truth & ~kept)),
    }


def tpr(kept, truth_malicious) -> float | None:
    c = confusion(kept, truth_malicious)
    positives = c["tp"] + c["fn"]
    return c["tp"] / positives if positives else None


def tnr(kept, truth_malicious) -> float | None:
    c = confusion(kept, truth_malicious)
    negatives = c["tn"] + c["fp"]
    return c["tn"] / negatives if negatives else None


def main_accuracy(model: TinyModel, clean_test: Dataset) -> float:
    if len(clean_test) == 0:
        raise InvalidInputError("empty test set")
    return float(np.mean(model.predict(clean_test.features) == clean_test.labels))


def backdoor_accuracy(model: TinyModel, clean_test: Dataset, trig: TriggerSpec) -> float:
    """Share of triggered non-target samples classified as the target label."""
    if len(clean_test) == 0:
        raise InvalidInputError("empty test set")
    source = clean_test.labels != trig.target_label
    if not source.any():
        raise InvalidInputError("test set holds only target-label samples")
    triggered = trig.apply(clean_test.features[source])
    return float(np.mean(model.predict(triggered) == trig.target_label))
