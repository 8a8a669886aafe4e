"""Discrete information measures over probability vectors (natural log).

``normalize`` is the only entry point that produces a valid probability
vector; it floors entries at ``eps_floor`` so that ``kl`` and ``jsd`` never
take the log of zero.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateDistributionError, InvalidInputError, InvalidScaleError

DEFAULT_EPS_FLOOR = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_pdf_vec(points, mu: float, sigma: float) -> np.ndarray:
    """Elementwise N(x; mu, sigma) density."""
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidScaleError(f"sigma must be positive and finite, got {sigma!r}")
    x = np.asarray(points, dtype=np.float64)
    z = (x - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * _SQRT_2PI)


def normalize(v, eps_floor: float = DEFAULT_EPS_FLOOR) -> np.ndarray:
    """Clamp entries to at least ``eps_floor`` and rescale to sum to one."""
    if eps_floor < 0:
        raise InvalidInputError("eps_floor must be >= 0")
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector contains non-finite entries")
    arr = np.maximum(arr, eps_floor)
    total = arr.sum()
    if not total > 0:
        raise DegenerateDistributionError("vector has no positive mass after flooring")
    return arr / total


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise InvalidInputError(f"length mismatch: {p.shape} vs {q.shape}")
    return p, q


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 taken as 0."""
    p = np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(max(-np.sum(nz * np.log(nz)), 0.0))


def kl(p, q) -> float:
    """KL(P || Q) in nats. Q must be positive wherever P is."""
    p, q = _pair(p, q)
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in nats; lies in [0, ln 2]."""
    p, q = _pair(p, q)
    m = 0.5 * (p + q)
    value = 0.5 * kl(p, m) + 0.5 * kl(q, m)
    # rounding can push the result a hair outside the closed interval
    return float(min(max(value, 0.0), math.log(2.0)))
