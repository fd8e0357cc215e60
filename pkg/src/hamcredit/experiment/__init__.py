from .config import ConfigError, ExperimentConfig, default_config, from_dict, parse_config
from .protocol import (
    GridResult,
    StageError,
    cross_validate,
    grid_search,
    run_benchmark,
    run_grid,
    run_single,
    score_external,
)
from .report import RunReport, export_report, load_report
from .training import TrainingError, TrainResult, run_training

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "GridResult",
    "RunReport",
    "StageError",
    "TrainResult",
    "TrainingError",
    "cross_validate",
    "default_config",
    "export_report",
    "from_dict",
    "grid_search",
    "load_report",
    "parse_config",
    "run_benchmark",
    "run_grid",
    "run_single",
    "run_training",
    "score_external",
]
