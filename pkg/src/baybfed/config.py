"""Experiment configuration: nested dataclasses loaded from YAML.

Every key is optional except ``n_clients`` and ``rounds``; unknown keys are
rejected. Validation errors carry the dotted path of the offending field,
e.g. ``attack.pdr``.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import yaml

from .attacks import AttackConfig, TriggerSpec
from .crp_jensen import DetectorConfig
from .detect_filter import FilterConfig
from .errors import BaybfedError, ConfigError

Defense = Literal["baybfed", "none", "median", "trimmed_mean"]
DEFENSES = ("baybfed", "none", "median", "trimmed_mean")
MAX_PMR = 0.5


@dataclass(frozen=True)
class DataConfig:
    n_train: int = 6000
    n_test: int = 2000
    n_classes: int = 10
    feature_dim: int = 8
    class_separation: float = 6.0

    def __post_init__(self):
        if self.n_classes < 2 or self.feature_dim < 2:
            raise ConfigError("", "n_classes and feature_dim must be >= 2")
        if self.n_train < self.n_classes or self.n_test < self.n_classes:
            raise ConfigError("", "n_train and n_test must be >= n_classes")


@dataclass(frozen=True)
class ModelConfig:
    hidden: int = 16

    def __post_init__(self):
        if self.hidden < 1:
            raise ConfigError("hidden", "must be >= 1")


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.1
    epochs: int = 3
    batch_size: int = 32

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate", "must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs", "must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size", "must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    n_clients: int
    rounds: int
    pmr: float = 0.2
    non_iid_degree: float = 0.7
    defense: Defense = "baybfed"
    trim_fraction: float = 0.2
    c0: float = 5.0
    posterior_rule: Literal["product", "classical"] = "product"
    order_checks: int = 0
    seed: int = 0
    attack: AttackConfig = field(default_factory=AttackConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    def __post_init__(self):
        if self.n_clients < 2:
            raise ConfigError("n_clients", "must be >= 2")
        if self.rounds < 1:
            raise ConfigError("rounds", "must be >= 1")
        if not 0.0 <= self.pmr <= MAX_PMR:
            raise ConfigError("pmr", f"must lie in [0, {MAX_PMR}] (adversary controls at most half)")
        if not 0.0 <= self.non_iid_degree <= 1.0:
            raise ConfigError("non_iid_degree", "must lie in [0, 1]")
        if self.defense not in DEFENSES:
            raise ConfigError("defense", f"must be one of {DEFENSES}")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise ConfigError("trim_fraction", "must lie in [0, 0.5)")
        if not self.c0 > 0:
            raise ConfigError("c0", "must be positive")
        if self.posterior_rule not in ("product", "classical"):
            raise ConfigError("posterior_rule", "must be 'product' or 'classical'")
        if self.order_checks < 0:
            raise ConfigError("order_checks", "must be >= 0")
        if self.n_clients > self.data.n_train:
            raise ConfigError("n_clients", "exceeds data.n_train")
        try:
            self.attack.trigger.validate_for(self.data.feature_dim, self.data.n_classes)
        except BaybfedError as exc:
            raise ConfigError("attack.trigger", str(exc)) from None

    @property
    def n_malicious(self) -> int:
        return int(round(self.pmr * self.n_clients))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _build(cls, raw: Any, path: str):
    if not isinstance(raw, dict):
        raise ConfigError(path, f"expected a mapping, got {type(raw).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(_join(path, unknown[0]), "unknown key")
    kwargs = {}
    for name, value in raw.items():
        sub = _join(path, name)
        kwargs[name] = _coerce(hints[name], value, sub)
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(_join(path, exc.path), str(exc).split(": ", 1)[-1]) from None
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None
    except (BaybfedError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def _join(path: str, name: str) -> str:
    if not name:
        return path
    return f"{path}.{name}" if path else name


def _coerce(hint, value, path: str):
    if dataclasses.is_dataclass(hint):
        return _build(hint, value, path)
    origin = typing.get_origin(hint)
    if origin is Literal:
        if value not in typing.get_args(hint):
            raise ConfigError(path, f"must be one of {typing.get_args(hint)}")
        return value
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        return float(value)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, "expected a list")
        return tuple(_coerce(int, v, f"{path}[{i}]") for i, v in enumerate(value))
    return value


def config_from_dict(raw: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, raw, "")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    def plain(obj):
        if isinstance(obj, tuple):
            return [plain(x) for x in obj]
        if isinstance(obj, dict):
            return {k: plain(v) for k, v in obj.items()}
        return obj

    return plain(dataclasses.asdict(cfg))


def parse_config(path) -> ExperimentConfig:
    """Load and validate a YAML experiment file. Missing files raise OSError."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"malformed YAML: {exc}") from None
    if raw is None:
        raw = {}
    return config_from_dict(raw)


def serialize_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


__all__ = [
    "AttackConfig",
    "DataConfig",
    "DetectorConfig",
    "ExperimentConfig",
    "FilterConfig",
    "ModelConfig",
    "TrainingConfig",
    "TriggerSpec",
    "config_from_dict",
    "config_to_dict",
    "parse_config",
    "serialize_config",
]
