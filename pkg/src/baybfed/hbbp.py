"""Hierarchical Beta-Bernoulli posterior tracking.

The base measure of each client's Beta Process is carried as a single scalar
summary ``h`` (initialised to the mean of the initial global model). The
conjugate update adds the update length to the concentration and folds the
weight sum into ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

from .core import as_vector
from .errors import DegenerateModelError, InvalidInputError

PosteriorRule = Literal["product", "classical"]
DEFAULT_CONCENTRATION = 5.0


@dataclass(frozen=True)
class BaselineStats:
    """Mean and population std of the flattened initial global model."""

    mu_p: float
    sigma_p: float


@dataclass(frozen=True)
class BetaProcessState:
    concentration: float
    base_summary: float
    client_id: int | None = None


def init_baseline(initial_global_model, c0: float = DEFAULT_CONCENTRATION):
    """Build the baseline statistics and the baseline Beta Process.

    Returns ``(BaselineStats, BetaProcessState)``.
    """
    w = np.asarray(initial_global_model, dtype=np.float64).ravel()
    if w.size == 0:
        raise InvalidInputError("initial global model is empty")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("initial global model has non-finite entries")
    if not c0 > 0:
        raise InvalidInputError(f"c0 must be positive, got {c0!r}")
    mu = float(np.mean(w))
    sigma = float(np.std(w))
    if sigma == 0.0:
        raise DegenerateModelError("initial global model is constant (std = 0)")
    return BaselineStats(mu, sigma), BetaProcessState(float(c0), mu)


def spawn_client_priors(
    baseline: BetaProcessState,
    n: int,
    rng: np.random.Generator,
    client_ids: Iterable[int] | None = None,
) -> list[BetaProcessState]:
    """Draw per-client priors: concentration ``1 + Poisson(c)``, base copied."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    ids = list(range(n)) if client_ids is None else list(client_ids)
    if len(ids) != n:
        raise InvalidInputError("client_ids length does not match n")
    draws = rng.poisson(baseline.concentration, size=n)
    return [
        BetaProcessState(1.0 + float(k), baseline.base_summary, cid)
        for k, cid in zip(draws, ids)
    ]


def posterior_update(
    state: BetaProcessState, update, rule: PosteriorRule = "product"
) -> BetaProcessState:
    """Conjugate posterior after observing one flattened update.

    ``rule="product"`` weights the sum term by ``1/(c*l)``; ``"classical"``
    uses the textbook ``1/(c+l)``.
    """
    w = as_vector(update)
    l = w.size
    if l < 1:
        raise InvalidInputError("update length must be >= 1")
    c, h = state.concentration, state.base_summary
    total = float(np.sum(w))
    if rule == "product":
        sum_weight = 1.0 / (c * l)
    elif rule == "classical":
        sum_weight = 1.0 / (c + l)
    else:
        raise InvalidInputError(f"unknown posterior rule {rule!r}")
    return replace(
        state,
        concentration=c + l,
        base_summary=(c / (c + l)) * h + sum_weight * total,
    )
