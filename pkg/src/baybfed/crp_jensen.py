"""CRP-Jensen: per-round clustering of client updates by Jensen-Shannon divergence.

For every client the detector builds a ``p`` distribution from the
cosine-shifted weights and the client's posterior base summary, and a ``q``
distribution per cluster (the existing ones plus a fresh candidate). The
largest divergence is the client's anomaly score; the cluster chosen is then
updated with a Gaussian conjugate step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Mapping, Sequence

import numpy as np

from . import errors
from .core import FlatUpdate, as_vector
from .detect_filter import FilterConfig, detect_filter
from .divergence import DEFAULT_EPS_FLOOR, jsd, normal_pdf_vec, normalize
from .errors import InvalidInputError, InvalidScaleError, InvalidStateError, ZeroVectorError
from .hbbp import BaselineStats, BetaProcessState, PosteriorRule, posterior_update

AssignmentRule = Literal["argmax_jd", "argmin_jd"]


@dataclass(frozen=True)
class DetectorConfig:
    mu0: float = 0.0
    sigma0: float = 1.0
    assignment_rule: AssignmentRule = "argmax_jd"
    sigma_floor: float = 1e-6
    eps_floor: float = DEFAULT_EPS_FLOOR

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise InvalidScaleError("sigma0 must be positive")
        if not self.sigma_floor > 0:
            raise InvalidScaleError("sigma_floor must be positive")
        if self.assignment_rule not in ("argmax_jd", "argmin_jd"):
            raise InvalidInputError(f"unknown assignment rule {self.assignment_rule!r}")

    @property
    def tau0(self) -> float:
        return 1.0 / (self.sigma0 * self.sigma0)


@dataclass(frozen=True)
class ClusterState:
    mean: float
    std: float
    count: int
    precision: float

    @classmethod
    def from_variance(cls, mean: float, variance: float, count: int) -> "ClusterState":
        return cls(float(mean), math.sqrt(variance), int(count), 1.0 / variance)


@dataclass(frozen=True)
class DetectionRecord:
    client_id: int
    max_jd: float
    assigned_cluster: int
    kept: bool = True


@dataclass
class RoundResult:
    records: list[DetectionRecord]
    clusters: list[ClusterState]
    priors: dict[int, BetaProcessState]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity of a zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def _check_pair(w: np.ndarray, g: np.ndarray):
    if w.shape != g.shape:
        raise InvalidInputError(f"length mismatch: {w.shape} vs {g.shape}")


def update_client_weight(update, g_prev) -> np.ndarray:
    """Shift every coordinate by cos(W, G_prev)."""
    w, g = as_vector(update), np.asarray(g_prev, dtype=np.float64)
    _check_pair(w, g)
    return w + cosine(w, g)


def measurement_error(update, g_prev) -> float:
    """``||W - G_prev|| * cos(W, G_prev)``; negative when the angle is obtuse."""
    w, g = as_vector(update), np.asarray(g_prev, dtype=np.float64)
    _check_pair(w, g)
    return float(np.linalg.norm(w - g)) * cosine(w, g)


def compute_p(
    w_up,
    baseline: BaselineStats,
    h_t: float,
    sigma_floor: float = 1e-6,
    eps_floor: float = DEFAULT_EPS_FLOOR,
) -> np.ndarray:
    w_up = np.asarray(w_up, dtype=np.float64)
    v = normal_pdf_vec(w_up, baseline.mu_p, baseline.sigma_p) + h_t
    # the mean is used as a scale, so it must be made positive
    scale = max(abs(float(np.mean(w_up))), sigma_floor)
    return normalize(normal_pdf_vec(v, 1.0, scale), eps_floor)


def compute_q(w_up, cluster: ClusterState, eps_floor: float = DEFAULT_EPS_FLOOR) -> np.ndarray:
    return normalize(normal_pdf_vec(w_up, cluster.mean, cluster.std), eps_floor)


def candidate_cluster(sigma_w: float, cfg: DetectorConfig) -> ClusterState:
    """Fresh cluster: mean mu0, variance sigma0^2 + sigma_w^2, no members."""
    return ClusterState.from_variance(cfg.mu0, cfg.sigma0**2 + sigma_w**2, 0)


def assign_cluster(
    p: np.ndarray,
    clusters: Sequence[ClusterState],
    candidate_new: ClusterState | None,
    w_up,
    cfg: DetectorConfig = DetectorConfig(),
) -> tuple[float, int, bool]:
    """Score ``p`` against every cluster and the candidate.

    Returns ``(max_jd, index, is_new)``. ``index == len(clusters)`` denotes the
    candidate. The maximum divergence is always the reported score; the
    assignment rule only selects the cluster. Ties go to the lowest index.
    """
    options = list(clusters)
    if candidate_new is not None:
        options.append(candidate_new)
    if not options:
        raise InvalidStateError("no clusters and no candidate to assign to")
    scores = np.array([jsd(p, compute_q(w_up, c, cfg.eps_floor)) for c in options])
    # np.argmax/argmin return the first occurrence, giving the tie rule
    idx = int(np.argmax(scores) if cfg.assignment_rule == "argmax_jd" else np.argmin(scores))
    is_new = candidate_new is not None and idx == len(clusters)
    return float(scores.max()), idx, is_new


def update_cluster(
    cluster: ClusterState, w_up, sigma_w: float, cfg: DetectorConfig = DetectorConfig()
) -> ClusterState:
    """Gaussian conjugate step for the cluster receiving ``w_up``.

    ``n_k`` is the number of members already present; a cluster being seeded
    (``count == 0``) is updated with ``n_k = 1`` so its first member counts.
    """
    w_bar = float(np.mean(np.asarray(w_up, dtype=np.float64)))
    n_k = max(cluster.count, 1)
    weight = n_k * cluster.precision
    denom = weight + cfg.tau0
    mean = (w_bar * weight + cfg.mu0 * cfg.tau0) / denom
    variance = 1.0 / denom + sigma_w * sigma_w
    return ClusterState.from_variance(mean, variance, cluster.count + 1)


def _with_client(exc: errors.BaybfedError, client_id) -> errors.BaybfedError:
    if isinstance(exc, errors.ConfigError):
        return exc
    return type(exc)(f"client {client_id}: {exc}")


def run_round(
    updates: Sequence[FlatUpdate],
    g_prev,
    priors: Mapping[int, BetaProcessState],
    clusters: Sequence[ClusterState],
    baseline: BaselineStats,
    cfg: DetectorConfig = DetectorConfig(),
    filter_cfg: FilterConfig = FilterConfig(),
    posterior_rule: PosteriorRule = "product",
) -> RoundResult:
    """Score, cluster and filter one round of updates in the given order."""
    g_prev = np.asarray(g_prev, dtype=np.float64)
    if not updates:
        raise InvalidInputError("no updates in round")
    length = len(updates[0])
    clusters = list(clusters)
    new_priors = dict(priors)
    scored: list[DetectionRecord] = []
    for upd in updates:
        cid = upd.client_id
        try:
            if len(upd) != length or length != g_prev.size:
                raise InvalidInputError("update length differs from the round's")
            if cid not in new_priors:
                raise InvalidStateError("no prior for this client")
            post = posterior_update(new_priors[cid], upd, posterior_rule)
            new_priors[cid] = post
            w_up = update_client_weight(upd, g_prev)
            sigma_w = measurement_error(upd, g_prev)
            p = compute_p(w_up, baseline, post.base_summary, cfg.sigma_floor, cfg.eps_floor)
            candidate = candidate_cluster(sigma_w, cfg)
            max_jd, idx, is_new = assign_cluster(p, clusters, candidate, w_up, cfg)
            if is_new:
                clusters.append(update_cluster(candidate, w_up, sigma_w, cfg))
            else:
                clusters[idx] = update_cluster(clusters[idx], w_up, sigma_w, cfg)
        except errors.BaybfedError as exc:
            raise _with_client(exc, cid) from exc
        scored.append(DetectionRecord(cid, max_jd, idx))
    kept = detect_filter([r.max_jd for r in scored], filter_cfg)
    records = [replace(r, kept=bool(k)) for r, k in zip(scored, kept)]
    return RoundResult(records, clusters, new_priors)
