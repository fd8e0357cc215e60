"""Out-of-time partitioning and expanding-window temporal folds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset


@dataclass(frozen=True)
class TemporalSplit:
    train: np.ndarray
    validation: np.ndarray
    oot: np.ndarray
    val_cut: int
    oot_cut: int

    def apply(self, ds: Dataset) -> tuple[Dataset, Dataset, Dataset]:
        return ds.subset(self.train), ds.subset(self.validation), ds.subset(self.oot)


def temporal_split(ds: Dataset, val_cut: int, oot_cut: int) -> TemporalSplit:
    """train: t < val_cut; validation: val_cut <= t < oot_cut; OOT: t >= oot_cut.

    Index arrays are sorted ascending, so the result does not depend on row order
    beyond which rows carry which periods.
    """
    if not val_cut < oot_cut:
        raise ValueError(f"val_cut ({val_cut}) must be < oot_cut ({oot_cut})")
    t = ds.time_index
    train = np.flatnonzero(t < val_cut)
    val = np.flatnonzero((t >= val_cut) & (t < oot_cut))
    oot = np.flatnonzero(t >= oot_cut)
    empty = [name for name, idx in (("train", train), ("validation", val), ("oot", oot)) if idx.size == 0]
    if empty:
        raise ValueError(f"empty partition(s) for cuts ({val_cut}, {oot_cut}): {', '.join(empty)}")
    return TemporalSplit(train, val, oot, int(val_cut), int(oot_cut))


def time_based_folds(ds: Dataset, k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """K contiguous folds in time order; pair j trains on folds 1..j and validates on j+1.

    Rows are ordered by (period, original position). Fold sizes differ by at
    most one, larger folds first. Returns K - 1 (train_idx, val_idx) pairs of
    indices into ``ds``.
    """
    if k < 2:
        raise ValueError(f"need K >= 2 folds, got {k}")
    n = len(ds)
    if n < k:
        raise ValueError(f"{n} rows cannot fill {k} folds")
    order = np.argsort(ds.time_index, kind="stable")
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    folds = [order[bounds[i]:bounds[i + 1]] for i in range(k)]
    return [(np.concatenate(folds[: j + 1]), folds[j + 1]) for j in range(k - 1)]
