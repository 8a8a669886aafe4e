"""Fast randomized invariant checks, runnable without pytest (``baybfed selftest``)."""

from __future__ import annotations

import math

import numpy as np

from .crp_jensen import ClusterState, DetectorConfig, update_cluster
from .detect_filter import FilterConfig, detect_filter
from .divergence import jsd, kl, normalize
from .hbbp import BetaProcessState, posterior_update
from .model import TinyModel, loss_and_grad


def _divergence(rng) -> bool:
    for _ in range(200):
        n = int(rng.integers(2, 20))
        p = normalize(rng.random(n))
        q = normalize(rng.random(n))
        d = jsd(p, q)
        if not (0.0 <= d <= math.log(2)) or abs(d - jsd(q, p)) > 1e-9:
            return False
        if jsd(p, p) > 1e-12 or kl(p, q) < -1e-12:
            return False
    return True


def _posterior(rng) -> bool:
    for _ in range(100):
        c, h = rng.uniform(0.5, 50), rng.normal()
        w = rng.normal(size=int(rng.integers(1, 50)))
        post = posterior_update(BetaProcessState(c, h), w)
        expected = c / (c + w.size) * h + w.sum() / (c * w.size)
        if post.concentration != c + w.size or abs(post.base_summary - expected) > 1e-12:
            return False
    return True


def _cluster(rng) -> bool:
    for _ in range(100):
        cfg = DetectorConfig(mu0=rng.normal(), sigma0=rng.uniform(0.2, 3))
        cl = ClusterState.from_variance(rng.normal(), rng.uniform(0.1, 4), int(rng.integers(1, 10)))
        nc = update_cluster(cl, rng.normal(size=5), rng.normal(), cfg)
        if abs(nc.precision - 1.0 / nc.std**2) > 1e-9 * nc.precision:
            return False
    return True


def _filter(_rng) -> bool:
    a = detect_filter([0.1, 0.2, 0.15, 0.9, 0.95], FilterConfig(1e-6, "combined"))
    b = detect_filter([0.3, 0.3, 0.3, 0.1, 0.12], FilterConfig(1e-6, "duplicate_only"))
    c = detect_filter([0.4] * 4)
    return (list(np.flatnonzero(a)) == [0, 1, 2] and list(np.flatnonzero(b)) == [3, 4]
            and not c.any())


def _gradient(rng) -> bool:
    model = TinyModel.init(4, 5, 3, rng)
    x, y = rng.normal(size=(16, 4)), rng.integers(0, 3, size=16)
    flat = model.flatten()
    _, grad = loss_and_grad(model, x, y)
    for k in rng.choice(flat.size, size=10, replace=False):
        e = np.zeros_like(flat)
        e[k] = 1e-5
        up = loss_and_grad(TinyModel.unflatten(flat + e, model.dims), x, y)[0]
        down = loss_and_grad(TinyModel.unflatten(flat - e, model.dims), x, y)[0]
        fd = (up - down) / 2e-5
        if abs(fd - grad[k]) > 1e-4 * max(abs(fd), abs(grad[k]), 1e-8):
            return False
    return True


CHECKS = {
    "divergence axioms": _divergence,
    "posterior arithmetic": _posterior,
    "cluster precision consistency": _cluster,
    "filter worked examples": _filter,
    "MLP gradient vs finite differences": _gradient,
}


def run_selftest(seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, check in CHECKS.items():
        passed = check(rng)
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
