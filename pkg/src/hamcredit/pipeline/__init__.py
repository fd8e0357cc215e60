from .dataset import (
    LABEL_COLUMN,
    TIME_COLUMN,
    DataError,
    Dataset,
    audit,
    audit_hook,
    concat,
    load_csv,
    write_csv,
)
from .smote import SmoteConfig, smote_oversample, smote_samples
from .splits import TemporalSplit, temporal_split, time_based_folds
from .synthetic import DriftGenConfig, synthesize_credit_data

__all__ = [
    "LABEL_COLUMN",
    "TIME_COLUMN",
    "DataError",
    "Dataset",
    "DriftGenConfig",
    "SmoteConfig",
    "TemporalSplit",
    "audit",
    "audit_hook",
    "concat",
    "load_csv",
    "smote_oversample",
    "smote_samples",
    "synthesize_credit_data",
    "temporal_split",
    "time_based_folds",
    "write_csv",
]
