"""Dataset container, CSV I/O and the leakage-audit hook."""

from __future__ import annotations

import contextlib
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

LABEL_COLUMN = "default_flag"
TIME_COLUMN = "orig_period"


class DataError(ValueError):
    """Malformed input data."""


@dataclass(frozen=True)
class Dataset:
    """Features, binary labels (1 = default) and an integer period per row.

    ``row_id`` tracks where each row came from: its position in the source
    dataset, or -1 for synthetic rows.
    """

    features: np.ndarray
    labels: np.ndarray
    time_index: np.ndarray
    feature_names: tuple[str, ...]
    row_id: np.ndarray | None = None

    def __post_init__(self):
        x = np.ascontiguousarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {x.shape}")
        n, d = x.shape
        y = np.asarray(self.labels)
        if y.shape != (n,):
            raise DataError(f"{y.shape[0] if y.ndim else 0} labels for {n} rows")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        t = np.asarray(self.time_index)
        if t.shape != (n,):
            raise DataError(f"time_index has shape {t.shape}, expected ({n},)")
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise DataError("time_index must be integral")
        names = tuple(self.feature_names)
        if len(names) != d:
            raise DataError(f"{len(names)} feature names for {d} columns")
        rid = np.arange(n, dtype=np.int64) if self.row_id is None else np.asarray(self.row_id, dtype=np.int64)
        if rid.shape != (n,):
            raise DataError("row_id length mismatch")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y.astype(np.int64))
        object.__setattr__(self, "time_index", t.astype(np.int64))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "row_id", rid)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.time_index[idx],
                       self.feature_names, self.row_id[idx])

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.time_index, self.feature_names, self.row_id)

    def default_rate(self) -> float:
        return float(self.labels.mean()) if len(self) else 0.0

    def is_identical(self, other: "Dataset") -> bool:
        """Bit-level equality of every field."""
        return (
            self.feature_names == other.feature_names
            and self.features.shape == other.features.shape
            and self.features.tobytes() == other.features.tobytes()
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.time_index, other.time_index)
            and np.array_equal(self.row_id, other.row_id)
        )


def concat(parts: Sequence[Dataset]) -> Dataset:
    if not parts:
        raise DataError("nothing to concatenate")
    names = parts[0].feature_names
    if any(p.feature_names != names for p in parts):
        raise DataError("feature names differ between parts")
    return Dataset(
        np.vstack([p.features for p in parts]),
        np.concatenate([p.labels for p in parts]),
        np.concatenate([p.time_index for p in parts]),
        names,
        np.concatenate([p.row_id for p in parts]),
    )


def _parse_float(cell: str, where: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise DataError(f"{where}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise DataError(f"{where}: non-finite value {cell!r}")
    return v


def load_csv(path, feature_columns: Sequence[str] | None = None,
             label_column: str = LABEL_COLUMN, time_column: str = TIME_COLUMN) -> Dataset:
    """Read a dataset; every cell must parse, nothing is imputed.

    Without ``feature_columns`` every column other than the label and time
    columns is a feature, in file order.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        for col in (label_column, time_column, *(feature_columns or ())):
            if col not in header:
                raise DataError(f"{path}: missing column {col!r}")
        if feature_columns is None:
            feature_columns = [h for h in header if h not in (label_column, time_column)]
        pos = {h: i for i, h in enumerate(header)}
        fidx = [pos[c] for c in feature_columns]
        rows_x, rows_y, rows_t = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            rows_x.append([_parse_float(row[i], f"{path}:{lineno}:{header[i]}") for i in fidx])
            y = _parse_float(row[pos[label_column]], f"{path}:{lineno}:{label_column}")
            if y not in (0.0, 1.0):
                raise DataError(f"{path}:{lineno}: label must be 0 or 1, got {row[pos[label_column]]!r}")
            t = _parse_float(row[pos[time_column]], f"{path}:{lineno}:{time_column}")
            if t != int(t):
                raise DataError(f"{path}:{lineno}: period must be an integer, got {row[pos[time_column]]!r}")
            rows_y.append(int(y))
            rows_t.append(int(t))
    if not rows_y:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows_x, dtype=np.float64).reshape(len(rows_y), len(fidx)),
                   np.array(rows_y), np.array(rows_t), tuple(feature_columns))


def write_csv(ds: Dataset, path) -> None:
    """Header, features in order, then label and period. Floats use repr (exact)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*ds.feature_names, LABEL_COLUMN, TIME_COLUMN])
        for i in range(len(ds)):
            w.writerow([*map(repr, ds.features[i].tolist()), int(ds.labels[i]), int(ds.time_index[i])])


# Leakage audit: stages that consume training data report what they saw.
_AUDIT_HOOKS: list[Callable[[str, Dataset], None]] = []


def audit(stage: str, ds: Dataset) -> None:
    for hook in list(_AUDIT_HOOKS):
        hook(stage, ds)


@contextlib.contextmanager
def audit_hook(fn: Callable[[str, Dataset], None]):
    _AUDIT_HOOKS.append(fn)
    try:
        yield fn
    finally:
        _AUDIT_HOOKS.remove(fn)
