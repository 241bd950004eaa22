"""Experiment configuration: one YAML file, validated before any data is read."""

from __future__ import annotations

import copy
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

ENV_PREFIX = "MSANA_CFG__"


class ConfigError(ValueError):
    pass


@dataclass
class StreamConfig:
    source: str = "synthetic"  # synthetic | csv
    generator: str = "abrupt"  # abrupt | gradual
    n_pre: int = 5000
    n_post: int = 5000
    n_total: int = 10000
    drift_center: int = 5000
    drift_width: int = 1000
    noise: float = 0.05
    path: str = ""
    schema: str = ""

    def validate(self):
        _choice("stream.source", self.source, ("synthetic", "csv"))
        _choice("stream.generator", self.generator, ("abrupt", "gradual"))
        if self.source == "csv" and not self.path:
            raise ConfigError("stream.path is required for csv sources")
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError("stream.noise must lie in [0, 0.5)")


@dataclass
class PreprocessingConfig:
    balancer: str = "dros"
    balance_threshold: float = 0.30
    scaler: str = "minmax"
    balance_buffer: int = 1000

    def validate(self):
        _choice("preprocessing.balancer", self.balancer, ("dros", "drus", "off"))
        _choice("preprocessing.scaler", self.scaler, ("minmax", "zscore"))
        if not 0.0 < self.balance_threshold <= 1.0:
            raise ConfigError("preprocessing.balance_threshold must lie in (0, 1]")
        _positive("preprocessing.balance_buffer", self.balance_buffer)


@dataclass
class DriftConfig:
    adwin_delta: float = 0.002
    eddm_alpha: float = 0.95
    eddm_beta: float = 0.90
    eddm_min_errors: int = 30
    dual_window: int = 100

    def validate(self):
        if not 0.0 < self.adwin_delta < 1.0:
            raise ConfigError("drift.adwin_delta must lie in (0, 1)")
        if not 0.0 < self.eddm_beta < self.eddm_alpha <= 1.0:
            raise ConfigError("drift requires 0 < eddm_beta < eddm_alpha <= 1")
        if self.dual_window < 0:
            raise ConfigError("drift.dual_window must be >= 0")


@dataclass
class FeatureSelectionConfig:
    fs_k: int = 20
    fs_var_threshold: float = 0.0

    def validate(self):
        _positive("feature_selection.fs_k", self.fs_k)
        if self.fs_var_threshold < 0:
            raise ConfigError("feature_selection.fs_var_threshold must be >= 0")


@dataclass
class TreeConfig:
    grace_period: float = 200.0
    delta: float = 1e-7
    tau: float = 0.05
    n_splits: int = 10
    max_depth: int = 20

    def validate(self, name="learners.tree"):
        _positive(f"{name}.grace_period", self.grace_period)
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"{name}.delta must lie in (0, 1)")


@dataclass
class EfdtConfig(TreeConfig):
    reeval_period: float = 200.0


@dataclass
class ArfConfig(TreeConfig):
    n_models: int = 10
    max_features: str = "sqrt"
    lam: float = 6.0
    drift_delta: float = 0.001
    warning_delta: float = 0.01


@dataclass
class KnnConfig:
    k: int = 5
    window: int = 500
    adwin_delta: float = 0.002

    def validate(self, name="learners.knn"):
        _positive(f"{name}.k", self.k)
        _positive(f"{name}.window", self.window)


@dataclass
class SamKnnConfig:
    k: int = 5
    stm_max: int = 500
    ltm_max: int = 500

    def validate(self, name="learners.samknn"):
        _positive(f"{name}.k", self.k)


@dataclass
class PaConfig:
    C: float = 1.0
    fit_intercept: bool = True

    def validate(self, name="learners.opa"):
        _positive(f"{name}.C", self.C)


@dataclass
class LearnersConfig:
    arf: ArfConfig = field(default_factory=ArfConfig)
    efdt: EfdtConfig = field(default_factory=EfdtConfig)
    ht: TreeConfig = field(default_factory=TreeConfig)
    knn: KnnConfig = field(default_factory=KnnConfig)
    samknn: SamKnnConfig = field(default_factory=SamKnnConfig)
    opa: PaConfig = field(default_factory=PaConfig)

    def validate(self):
        for f in dataclasses.fields(self):
            getattr(self, f.name).validate(f"learners.{f.name}")


@dataclass
class EnsembleConfig:
    epsilon: float = 0.001
    alpha_ratio: float = 0.1
    replay_buffer: int = 2000
    retrain_min: int = 500
    window_from_drift_index: bool = False

    def validate(self):
        _positive("ensemble.epsilon", self.epsilon)
        if not 0.0 < self.alpha_ratio <= 1.0:
            raise ConfigError("ensemble.alpha_ratio must lie in (0, 1]")
        _positive("ensemble.replay_buffer", self.replay_buffer)


@dataclass
class EvaluationConfig:
    train_fraction: float = 0.1
    curve_stride: int = 50
    warmup: int = 100
    pdf_bins: int = 50
    positive_class: int = 1
    tail_window: int = 2000

    def validate(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("evaluation.train_fraction must lie in (0, 1)")
        _positive("evaluation.curve_stride", self.curve_stride)


@dataclass
class PipelineConfig:
    seed: int = 1
    threads: int = 1
    stream: StreamConfig = field(default_factory=StreamConfig)
    preprocessing: PreprocessingConfig = field(default_factory=PreprocessingConfig)
    drift: DriftConfig = field(default_factory=DriftConfig)
    feature_selection: FeatureSelectionConfig = field(default_factory=FeatureSelectionConfig)
    learners: LearnersConfig = field(default_factory=LearnersConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    def validate(self):
        _positive("threads", self.threads)
        for f in dataclasses.fields(self):
            sub = getattr(self, f.name)
            if dataclasses.is_dataclass(sub):
                sub.validate()
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _choice(name, value, options):
    if value not in options:
        raise ConfigError(f"{name} must be one of {options}, got {value!r}")


def _positive(name, value):
    if value <= 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")


def _build(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in fields:
            raise ConfigError(f"unknown config key: {where}")
        default = fields[key].default_factory() if fields[key].default_factory is not dataclasses.MISSING else fields[key].default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value, where)
        else:
            kwargs[key] = _coerce(where, value, default)
    return cls(**kwargs)


def _coerce(where, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        return str(value)
    return value


def _apply_env(data: dict, environ) -> dict:
    """``MSANA_CFG__ENSEMBLE__EPSILON=0.01`` sets ``ensemble.epsilon``."""
    for var, raw in sorted(environ.items()):
        if not var.startswith(ENV_PREFIX):
            continue
        keys = [k.lower() for k in var[len(ENV_PREFIX):].split("__") if k]
        node = data
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{var} descends into a non-mapping key")
        node[keys[-1]] = yaml.safe_load(raw)
    return data


def from_dict(data: dict, environ=None) -> PipelineConfig:
    data = _apply_env(copy.deepcopy(data or {}), os.environ if environ is None else environ)
    return _build(PipelineConfig, data, "").validate()


def load_config(path, environ=None) -> PipelineConfig:
    path = Path(path)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    cfg = from_dict(data, environ)
    # relative data paths resolve against the config file's directory
    for attr in ("path", "schema"):
        value = getattr(cfg.stream, attr)
        if value and not Path(value).is_absolute():
            setattr(cfg.stream, attr, str((path.parent / value).resolve()))
    return cfg
