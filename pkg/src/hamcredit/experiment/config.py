"""Experiment configuration: a TOML file with one table per component.

Unknown keys are rejected, and validation reports every violation at once.
``default.toml`` in this package is the reference and documents each key.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, get_type_hints

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..loss import LossConfig
from ..mlp import LayerSpec
from ..optimizer import OptimConfig
from ..pipeline.smote import SmoteConfig
from ..pipeline.synthetic import DriftGenConfig

OPTIMIZER_KINDS = ("symplectic", "sgd_momentum")


class ConfigError(ValueError):
    def __init__(self, problems: list[str], source: str = "config"):
        self.problems = list(problems)
        super().__init__(f"{source}: " + "; ".join(self.problems))


@dataclass
class SyntheticSection:
    n_rows: int = 20000
    n_features: int = 10
    base_default_rate: float = 0.1
    drift_magnitude: float = 0.05
    n_periods: int = 10
    horizon_months: int = 12
    signal: float = 2.0


@dataclass
class DataSection:
    source: str = "synthetic"
    csv_path: str = ""
    feature_columns: list = field(default_factory=list)
    standardize: bool = True
    val_cut: int = 6
    oot_cut: int = 8
    synthetic: SyntheticSection = field(default_factory=SyntheticSection)


@dataclass
class SmoteSection:
    enabled: bool = True
    k_neighbors: int = 5
    target_ratio: float = 1.0
    standardize: bool = True


@dataclass
class ModelSection:
    hidden_dims: list = field(default_factory=lambda: [128, 64])
    dropout_rate: float = 0.2
    activation: str = "leaky_relu"
    slope: float = 0.01


@dataclass
class LossSection:
    lam: float = field(default=0.01, metadata={"key": "lambda"})
    exclude_bias: bool = False


@dataclass
class OptimizerSection:
    kind: str = "symplectic"
    learning_rate: float = 0.01
    beta: float = 0.9
    epsilon: float = 1e-8
    global_h: bool = False


@dataclass
class TrainingSection:
    max_epochs: int = 100
    batch_size: int = 256
    patience: int = 10
    threshold: float = 0.5
    n_jobs: int = 1


@dataclass
class CVSection:
    k: int = 5


@dataclass
class GridSection:
    learning_rate: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    lam: list = field(default_factory=list, metadata={"key": "lambda"})
    hidden_dims: list = field(default_factory=list)


@dataclass
class ExperimentConfig:
    seed: int = 0
    data: DataSection = field(default_factory=DataSection)
    smote: SmoteSection = field(default_factory=SmoteSection)
    model: ModelSection = field(default_factory=ModelSection)
    loss: LossSection = field(default_factory=LossSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    cv: CVSection = field(default_factory=CVSection)
    grid: GridSection = field(default_factory=GridSection)

    # derived component configs

    def layer_spec(self, input_dim: int) -> LayerSpec:
        m = self.model
        return LayerSpec(input_dim, tuple(m.hidden_dims), m.dropout_rate, m.activation, m.slope)

    def loss_config(self) -> LossConfig:
        return LossConfig(self.loss.lam, self.loss.exclude_bias)

    def optim_config(self) -> OptimConfig:
        o = self.optimizer
        return OptimConfig(o.learning_rate, o.beta, o.epsilon, o.global_h)

    def smote_config(self, seed: int | None = None) -> SmoteConfig:
        s = self.smote
        return SmoteConfig(s.k_neighbors, s.target_ratio, self.seed if seed is None else seed, s.standardize)

    def generator_config(self) -> DriftGenConfig:
        return DriftGenConfig(seed=self.seed, **dataclasses.asdict(self.data.synthetic))

    def grid_axes(self) -> dict[str, list]:
        """Non-empty grid axes, keyed by config path."""
        g = self.grid
        axes = {
            "optimizer.learning_rate": g.learning_rate,
            "optimizer.beta": g.beta,
            "loss.lambda": g.lam,
            "model.hidden_dims": g.hidden_dims,
        }
        return {k: list(v) for k, v in axes.items() if v}

    def with_overrides(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        """Copy with dotted-path values replaced, e.g. {"loss.lambda": 0.1}."""
        d = self.to_dict()
        for path, value in overrides.items():
            node = d
            *parents, leaf = path.split(".")
            for p in parents:
                node = node[p]
            if leaf not in node:
                raise ConfigError([f"{path}: unknown key"])
            node[leaf] = copy.deepcopy(value)
        return from_dict(d)

    def to_dict(self) -> dict:
        return _to_dict(self)

    def validate(self) -> None:
        problems = validation_problems(self)
        if problems:
            raise ConfigError(problems)


def _key(f: dataclasses.Field) -> str:
    return f.metadata.get("key", f.name)


def _to_dict(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        out[_key(f)] = _to_dict(v) if dataclasses.is_dataclass(v) else copy.deepcopy(v)
    return out


_SCALARS = {int: "an integer", float: "a number", bool: "a boolean", str: "a string", list: "a list"}


def _coerce(value, typ, where: str, problems: list[str]):
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ in (int, float) and isinstance(value, bool):
        problems.append(f"{where}: expected {_SCALARS[typ]}, got {value!r}")
        return value
    if typ in _SCALARS and not isinstance(value, typ):
        problems.append(f"{where}: expected {_SCALARS[typ]}, got {value!r}")
    return value


def _build(cls, data: dict, path: str, problems: list[str]):
    if not isinstance(data, dict):
        problems.append(f"{path or 'root'}: expected a table")
        return cls()
    fields = {_key(f): f for f in dataclasses.fields(cls)}
    hints = get_type_hints(cls)
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in fields:
            problems.append(f"{where}: unknown key")
            continue
        f = fields[key]
        typ = hints[f.name]
        if dataclasses.is_dataclass(typ):
            kwargs[f.name] = _build(typ, value, where, problems)
        else:
            kwargs[f.name] = _coerce(value, typ, where, problems)
    return cls(**kwargs)


def validation_problems(cfg: ExperimentConfig) -> list[str]:
    problems = []

    def check(where, fn):
        try:
            fn()
        except (ValueError, TypeError) as exc:
            problems.append(f"{where}: {exc}")

    d = cfg.data
    if d.source not in ("synthetic", "csv"):
        problems.append(f"data.source: must be 'synthetic' or 'csv', got {d.source!r}")
    if d.source == "csv" and not d.csv_path:
        problems.append("data.csv_path: required when data.source = 'csv'")
    if not d.val_cut < d.oot_cut:
        problems.append(f"data.val_cut ({d.val_cut}) must be below data.oot_cut ({d.oot_cut})")
    if d.source == "synthetic":
        check("data.synthetic", cfg.generator_config)
    if cfg.seed < 0 or cfg.seed >= 2**64:
        problems.append("seed: must be a 64-bit unsigned integer")
    check("smote", cfg.smote_config)
    check("model", lambda: cfg.layer_spec(1))
    check("loss", cfg.loss_config)
    check("optimizer", cfg.optim_config)
    if cfg.optimizer.kind not in OPTIMIZER_KINDS:
        problems.append(f"optimizer.kind: must be one of {OPTIMIZER_KINDS}, got {cfg.optimizer.kind!r}")
    t = cfg.training
    if t.max_epochs < 1:
        problems.append("training.max_epochs: must be >= 1")
    if t.batch_size < 1:
        problems.append("training.batch_size: must be >= 1")
    if t.patience < 0:
        problems.append("training.patience: must be >= 0")
    if t.n_jobs < 1:
        problems.append("training.n_jobs: must be >= 1")
    if not 0 <= t.threshold <= 1:
        problems.append("training.threshold: must be in [0, 1]")
    if cfg.cv.k < 2:
        problems.append("cv.k: must be >= 2")
    g = cfg.grid
    for lr in g.learning_rate:
        check("grid.learning_rate", lambda lr=lr: OptimConfig(eta=lr))
    for b in g.beta:
        check("grid.beta", lambda b=b: OptimConfig(beta=b))
    for lam in g.lam:
        check("grid.lambda", lambda lam=lam: LossConfig(lam))
    for h in g.hidden_dims:
        check("grid.hidden_dims", lambda h=h: LayerSpec(1, tuple(h)))
    return problems


def from_dict(data: dict, source: str = "config") -> ExperimentConfig:
    problems: list[str] = []
    cfg = _build(ExperimentConfig, data, "", problems)
    if not problems:
        problems = validation_problems(cfg)
    if problems:
        raise ConfigError(problems, source)
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        # message carries "(at line L, column C)"
        raise ConfigError([f"parse error: {exc}"], str(path)) from None
    return from_dict(data, str(path))


def default_config_text() -> str:
    return resources.files("hamcredit").joinpath("configs/default.toml").read_text()


def default_config() -> ExperimentConfig:
    return from_dict(tomllib.loads(default_config_text()), "default.toml")
