"""Backdoor attacks run by malicious clients.

Attack code only ever sees what a client legitimately has: the previous
global model, its own data, public constants of the defense and quantities it
estimates itself. Server-side cluster state is never passed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .crp_jensen import compute_p
from .data import Dataset
from .divergence import DEFAULT_EPS_FLOOR
from .errors import InvalidInputError
from .hbbp import BaselineStats
from .model import TinyModel, TrainHyper, local_train

AttackKind = Literal["data_poison", "constrain_and_scale", "adaptive"]
ATTACK_KINDS = ("data_poison", "constrain_and_scale", "adaptive")


@dataclass(frozen=True)
class TriggerSpec:
    trigger_coords: tuple[int, ...] = (0, 1)
    trigger_value: float = -6.0
    target_label: int = 0

    def __post_init__(self):
        object.__setattr__(self, "trigger_coords", tuple(int(c) for c in self.trigger_coords))
        if not self.trigger_coords:
            raise InvalidInputError("trigger needs at least one coordinate")

    def validate_for(self, feature_dim: int, n_classes: int):
        if any(c < 0 or c >= feature_dim for c in self.trigger_coords):
            raise InvalidInputError(f"trigger coords {self.trigger_coords} outside feature dim {feature_dim}")
        if not 0 <= self.target_label < n_classes:
            raise InvalidInputError(f"target label {self.target_label} outside [0, {n_classes})")

    def apply(self, features: np.ndarray) -> np.ndarray:
        out = np.array(features, dtype=np.float64, copy=True)
        out[:, list(self.trigger_coords)] = self.trigger_value
        return out


@dataclass(frozen=True)
class AttackConfig:
    kind: AttackKind = "constrain_and_scale"
    pdr: float = 0.5
    scale_factor: float = 10.0
    alpha: float = 1.0
    seed: int = 0
    trigger: TriggerSpec = field(default_factory=TriggerSpec)

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise InvalidInputError(f"unknown attack kind {self.kind!r}")
        if not 0.0 <= self.pdr <= 1.0:
            raise InvalidInputError("pdr must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError("alpha must lie in [0, 1]")
        if not self.scale_factor > 0:
            raise InvalidInputError("scale_factor must be positive")


def poison_dataset(data: Dataset, trig: TriggerSpec, pdr: float, seed: int) -> Dataset:
    """Stamp the trigger on ``floor(pdr * n)`` random samples and relabel them."""
    if not 0.0 <= pdr <= 1.0:
        raise InvalidInputError("pdr must lie in [0, 1]")
    trig.validate_for(data.feature_dim, data.n_classes)
    n = len(data)
    k = int(np.floor(pdr * n))
    idx = np.random.default_rng(seed).choice(n, size=k, replace=False)
    features = data.features.copy()
    labels = data.labels.copy()
    features[idx] = trig.apply(features[idx])
    labels[idx] = trig.target_label
    return Dataset(features, labels, data.n_classes)


def constrain_and_scale(trained, g_prev, scale: float) -> np.ndarray:
    """``G_prev + scale * (W - G_prev)``."""
    w = np.asarray(trained, dtype=np.float64)
    g = np.asarray(g_prev, dtype=np.float64)
    if w.shape != g.shape:
        raise InvalidInputError("length mismatch between update and global model")
    return g + scale * (w - g)


def p_statistic_grad(
    submitted: np.ndarray,
    g_prev: np.ndarray,
    target_p: np.ndarray,
    h_estimate: float,
    baseline: BaselineStats,
    sigma_floor: float = 1e-6,
    eps_floor: float = DEFAULT_EPS_FLOOR,
) -> tuple[float, np.ndarray]:
    """Evasion loss ``l * ||p(S) - target_p||^2`` and its gradient in ``S``.

    ``p(S)`` is the detector's client-side distribution evaluated on the
    submitted vector ``S`` with the attacker's own base-measure estimate. The
    probability floor is treated as inactive in the gradient.
    """
    s_vec = np.asarray(submitted, dtype=np.float64)
    l = s_vec.size
    ns, ng = np.linalg.norm(s_vec), np.linalg.norm(g_prev)
    cos = float(s_vec @ g_prev / (ns * ng))
    u = s_vec + cos
    z = (u - baseline.mu_p) / baseline.sigma_p
    a = np.exp(-0.5 * z * z) / (baseline.sigma_p * np.sqrt(2 * np.pi))
    v = a + h_estimate
    m = float(np.mean(u))
    sc = max(abs(m), sigma_floor)
    r = np.exp(-0.5 * ((v - 1.0) / sc) ** 2) / (sc * np.sqrt(2 * np.pi))
    total = r.sum()
    p = compute_p(u, baseline, h_estimate, sigma_floor, eps_floor)
    diff = p - target_p
    loss = float(l * diff @ diff)

    dp = 2.0 * l * diff
    dr = (dp - dp @ p) / total
    dv = -dr * r * (v - 1.0) / sc**2
    du = dv * a * (-(u - baseline.mu_p) / baseline.sigma_p**2)
    if abs(m) > sigma_floor:
        ds = float(np.sum(dr * r * ((v - 1.0) ** 2 / sc**3 - 1.0 / sc)))
        du = du + ds * np.sign(m) / l
    dcos = g_prev / (ns * ng) - cos * s_vec / ns**2
    return loss, du + du.sum() * dcos


def adaptive_train(
    model: TinyModel,
    poisoned: Dataset,
    hyper: TrainHyper,
    alpha: float,
    h_estimate: float,
    baseline: BaselineStats,
    reference_p: np.ndarray,
    g_prev: np.ndarray,
    scale: float = 1.0,
    sigma_floor: float = 1e-6,
) -> np.ndarray:
    """Train on ``alpha * CE + (1 - alpha) * evasion`` and return the submitted vector.

    ``reference_p`` is the p-statistic of the attacker's benign reference
    model. The evasion term is measured on the vector that will actually be
    submitted, i.e. after scaling by ``scale`` around ``g_prev``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError("alpha must lie in [0, 1]")
    g_prev = np.asarray(g_prev, dtype=np.float64)
    regularizer = None
    if alpha < 1.0:
        def regularizer(flat):
            submitted = constrain_and_scale(flat, g_prev, scale)
            loss, grad = p_statistic_grad(
                submitted, g_prev, reference_p, h_estimate, baseline, sigma_floor
            )
            return (1.0 - alpha) * loss, (1.0 - alpha) * scale * grad
    trained = local_train(model, poisoned, hyper, regularizer=regularizer, class_weight=alpha)
    return constrain_and_scale(trained.flatten(), g_prev, scale)
