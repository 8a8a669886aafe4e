"""Federated-learning scenario engine wiring data, clients, attacks and defense."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import aggregation
from .attacks import adaptive_train, constrain_and_scale, poison_dataset
from .config import ExperimentConfig, config_to_dict
from .core import FlatUpdate
from .crp_jensen import ClusterState, DetectionRecord, compute_p, run_round, update_client_weight
from .data import Dataset, PartitionSpec, blob_centers, partition, sample_blobs
from .errors import EmptyAggregationError
from .hbbp import BaselineStats, BetaProcessState, init_baseline, posterior_update, spawn_client_priors
from .metrics import RoundMetrics, backdoor_accuracy, main_accuracy, tnr, tpr
from .model import TinyModel, TrainHyper, local_train

log = logging.getLogger(__name__)

# stream tags for SeedSequence fan-out
_CENTERS, _TRAIN, _TEST, _PARTITION, _INIT, _PRIORS, _ADVERSARY, _LOCAL, _POISON, _ORDER = range(10)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("BAYBFED_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TraceRow:
    round: int
    client_id: int
    is_malicious: bool
    max_jd: float | None
    assigned_cluster: int | None
    kept: bool


@dataclass
class Report:
    config: ExperimentConfig
    malicious_ids: list[int]
    rounds: list[RoundMetrics] = field(default_factory=list)
    trace: list[TraceRow] = field(default_factory=list)
    skipped_rounds: list[int] = field(default_factory=list)
    order_invariant: list[bool | None] = field(default_factory=list)
    final_model: TinyModel | None = None

    @property
    def final(self) -> RoundMetrics:
        return self.rounds[-1]

    def round_scores(self, rnd: int) -> tuple[np.ndarray, np.ndarray]:
        """Max-JD scores of round ``rnd`` split into (benign, malicious)."""
        rows = [r for r in self.trace if r.round == rnd and r.max_jd is not None]
        benign = np.array([r.max_jd for r in rows if not r.is_malicious])
        malicious = np.array([r.max_jd for r in rows if r.is_malicious])
        return benign, malicious

    def to_summary(self) -> dict:
        def metrics(m: RoundMetrics) -> dict:
            return {"round": m.round, "tpr": m.tpr, "tnr": m.tnr, "ba": m.ba, "ma": m.ma,
                    "kept_count": m.kept_count}

        return {
            "seed": self.config.seed,
            "malicious_ids": self.malicious_ids,
            "per_round": [metrics(m) for m in self.rounds],
            "final": metrics(self.final),
            "skipped_rounds": self.skipped_rounds,
            "order_invariant": self.order_invariant,
            "config": config_to_dict(self.config),
        }


@dataclass
class Scenario:
    """Everything fixed before round 1."""

    train_shards: list[Dataset]
    test: Dataset
    initial: TinyModel
    malicious_ids: list[int]


def build_scenario(cfg: ExperimentConfig) -> Scenario:
    d = cfg.data
    centers = blob_centers(d.n_classes, d.feature_dim, d.class_separation, derive_seed(cfg.seed, _CENTERS))
    train = sample_blobs(centers, d.n_train, derive_rng(cfg.seed, _TRAIN))
    test = sample_blobs(centers, d.n_test, derive_rng(cfg.seed, _TEST))
    shards = partition(train, PartitionSpec(cfg.n_clients, cfg.non_iid_degree, derive_seed(cfg.seed, _PARTITION)))
    initial = TinyModel.init(d.feature_dim, cfg.model.hidden, d.n_classes, derive_rng(cfg.seed, _INIT))
    chosen = derive_rng(cfg.seed, _ADVERSARY).choice(cfg.n_clients, size=cfg.n_malicious, replace=False)
    return Scenario(shards, test, initial, sorted(int(i) for i in chosen))


class _Adversary:
    """Client-side state of one malicious client (its own base-measure estimate)."""

    def __init__(self, c0: float, baseline: BaselineStats):
        self.belief = BetaProcessState(c0, baseline.mu_p)


def _client_update(
    cfg: ExperimentConfig,
    sc: Scenario,
    cid: int,
    rnd: int,
    g_prev: np.ndarray,
    baseline: BaselineStats,
    adversary: _Adversary | None,
) -> np.ndarray:
    dims = sc.initial.dims
    start = TinyModel.unflatten(g_prev, dims)
    t = cfg.training
    hyper = TrainHyper(t.learning_rate, t.epochs, t.batch_size, derive_seed(cfg.seed, _LOCAL, rnd, cid))
    shard = sc.train_shards[cid]
    if adversary is None:
        return local_train(start, shard, hyper).flatten()
    atk = cfg.attack
    poisoned = poison_dataset(shard, atk.trigger, atk.pdr, derive_seed(cfg.seed, _POISON, rnd, cid))
    if atk.kind == "data_poison":
        return local_train(start, poisoned, hyper).flatten()
    if atk.kind == "constrain_and_scale":
        return constrain_and_scale(local_train(start, poisoned, hyper).flatten(), g_prev, atk.scale_factor)
    # adaptive: estimate the benign p-statistic from a model trained on clean data
    reference = local_train(start, shard, hyper).flatten()
    adversary.belief = posterior_update(adversary.belief, reference, cfg.posterior_rule)
    h_est = adversary.belief.base_summary
    det = cfg.detector
    ref_p = compute_p(update_client_weight(reference, g_prev), baseline, h_est, det.sigma_floor, det.eps_floor)
    return adaptive_train(start, poisoned, hyper, atk.alpha, h_est, baseline, ref_p, g_prev,
                          scale=atk.scale_factor, sigma_floor=det.sigma_floor)


def run_experiment(cfg: ExperimentConfig, scenario: Scenario | None = None) -> Report:
    sc = scenario or build_scenario(cfg)
    malicious = set(sc.malicious_ids)
    g = sc.initial.flatten()
    baseline, root = init_baseline(g, cfg.c0)
    ids = list(range(cfg.n_clients))
    priors = {p.client_id: p for p in spawn_client_priors(root, cfg.n_clients, derive_rng(cfg.seed, _PRIORS), ids)}
    clusters: list[ClusterState] = []
    adversaries = {cid: _Adversary(cfg.c0, baseline) for cid in sc.malicious_ids}
    report = Report(cfg, sc.malicious_ids)
    trig = cfg.attack.trigger

    for rnd in range(1, cfg.rounds + 1):
        def train(cid, g_prev=g, rnd=rnd):
            return _client_update(cfg, sc, cid, rnd, g_prev, baseline, adversaries.get(cid))

        workers = thread_cap()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                vectors = list(pool.map(train, ids))
        else:
            vectors = [train(cid) for cid in ids]
        updates = [FlatUpdate(cid, rnd, v, cid in malicious) for cid, v in zip(ids, vectors)]

        records: list[DetectionRecord | None] = [None] * len(updates)
        if cfg.defense == "baybfed":
            result = run_round(updates, g, priors, clusters, baseline, cfg.detector, cfg.filter, cfg.posterior_rule)
            report.order_invariant.append(
                _order_check(cfg, rnd, updates, g, priors, clusters, baseline, result.records)
            )
            records = list(result.records)
            priors, clusters = result.priors, result.clusters
            kept = np.array([r.kept for r in records])
        else:
            report.order_invariant.append(None)
            kept = np.ones(len(updates), dtype=bool)

        selected = [u for u, k in zip(updates, kept) if k]
        try:
            if cfg.defense == "median":
                g = aggregation.coordinate_median(selected, rnd).weights
            elif cfg.defense == "trimmed_mean":
                g = aggregation.trimmed_mean(selected, cfg.trim_fraction, rnd).weights
            else:
                g = aggregation.fedavg(selected, rnd).weights
        except EmptyAggregationError:
            log.warning("round %d: every update filtered, keeping previous global model", rnd)
            report.skipped_rounds.append(rnd)

        model = TinyModel.unflatten(g, sc.initial.dims)
        truth = np.array([u.truth_malicious for u in updates])
        report.rounds.append(RoundMetrics(
            rnd, tpr(kept, truth), tnr(kept, truth),
            backdoor_accuracy(model, sc.test, trig), main_accuracy(model, sc.test), int(kept.sum()),
        ))
        for u, rec, k in zip(updates, records, kept):
            report.trace.append(TraceRow(
                rnd, u.client_id, u.truth_malicious,
                None if rec is None else rec.max_jd,
                None if rec is None else rec.assigned_cluster,
                bool(k),
            ))
        log.info("round %d: %s", rnd, report.rounds[-1])

    report.final_model = TinyModel.unflatten(g, sc.initial.dims)
    return report


def _order_check(cfg, rnd, updates, g, priors, clusters, baseline, records) -> bool | None:
    """Re-run detection on shuffled client orders; True if the kept set never changes."""
    if cfg.order_checks == 0:
        return None
    reference = {r.client_id for r in records if r.kept}
    rng = derive_rng(cfg.seed, _ORDER, rnd)
    for _ in range(cfg.order_checks):
        order = rng.permutation(len(updates))
        shuffled = run_round([updates[i] for i in order], g, priors, clusters, baseline,
                             cfg.detector, cfg.filter, cfg.posterior_rule)
        if {r.client_id for r in shuffled.records if r.kept} != reference:
            return False
    return True
