"""Bayesian nonparametric backdoor detection for federated learning, with a desk-scale simulator."""

from .aggregation import GlobalModel, coordinate_median, fedavg, trimmed_mean
from .config import ExperimentConfig, parse_config
from .core import FlatUpdate
from .crp_jensen import ClusterState, DetectionRecord, DetectorConfig, run_round
from .detect_filter import FilterConfig, detect_filter
from .hbbp import BaselineStats, BetaProcessState, init_baseline, posterior_update, spawn_client_priors
from .simulation import Report, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BaselineStats",
    "BetaProcessState",
    "ClusterState",
    "DetectionRecord",
    "DetectorConfig",
    "ExperimentConfig",
    "FilterConfig",
    "FlatUpdate",
    "GlobalModel",
    "Report",
    "coordinate_median",
    "detect_filter",
    "fedavg",
    "init_baseline",
    "parse_config",
    "posterior_update",
    "run_experiment",
    "run_round",
    "spawn_client_priors",
    "trimmed_mean",
]
