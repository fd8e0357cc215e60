"""SMOTE for the default (label 1) class.

Each synthetic row is ``x_i + u * (x_nn - x_i)`` with donor ``x_i`` a minority
row, ``x_nn`` one of its ``k`` nearest minority neighbours and ``u`` uniform on
[0, 1). Donors are visited in shuffled rounds so every minority row donates
either ``floor`` or ``ceil`` of n_synthetic / n_minority times.

Callers must only ever pass training rows; the experiment pipeline enforces it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import RngStream
from .dataset import Dataset, audit, concat

_BLOCK = 1024


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not 0 < self.target_ratio <= 1:
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")


def nearest_neighbors(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest other rows (Euclidean), ties broken by index."""
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * x[start:stop] @ x.T
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        out[start:stop] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def n_synthetic(n_minority: int, n_majority: int, target_ratio: float) -> int:
    return max(0, int(round(target_ratio * n_majority)) - n_minority)


def smote_samples(train: Dataset, cfg: SmoteConfig, rng: RngStream | None = None):
    """Synthetic rows only, with their provenance.

    Returns (synthetic, donor_idx, partner_idx); the index arrays point into
    ``train`` and give the segment each synthetic row was drawn from.
    """
    audit("smote", train)
    minority = np.flatnonzero(train.labels == 1)
    n_min = minority.size
    n_maj = len(train) - n_min
    if n_min < 2:
        raise ValueError(f"SMOTE needs at least 2 minority rows, got {n_min}")
    if cfg.k_neighbors >= n_min:
        raise ValueError(f"k_neighbors={cfg.k_neighbors} must be below the minority count {n_min}")
    n_new = n_synthetic(n_min, n_maj, cfg.target_ratio)
    rng = rng if rng is not None else RngStream(cfg.seed)

    x_min = train.features[minority]
    space = x_min
    if cfg.standardize:
        mu = train.features.mean(axis=0)
        sd = train.features.std(axis=0)
        space = (x_min - mu) / np.where(sd > 0, sd, 1.0)
    nbrs = nearest_neighbors(space, cfg.k_neighbors)

    rounds = -(-n_new // n_min)
    donors = np.concatenate([rng.permutation(n_min) for _ in range(rounds)] or [np.empty(0, np.int64)])[:n_new]
    pick = rng.integers(cfg.k_neighbors, size=n_new) if n_new else np.empty(0, np.int64)
    gap = rng.random(n_new) if n_new else np.empty(0)
    partners = nbrs[donors, pick]
    base = x_min[donors]
    synth = base + gap[:, None] * (x_min[partners] - base)

    synthetic = Dataset(
        synth.reshape(n_new, train.n_features),
        np.ones(n_new, dtype=np.int64),
        train.time_index[minority][donors],
        train.feature_names,
        np.full(n_new, -1, dtype=np.int64),
    )
    return synthetic, minority[donors], minority[partners]


def smote_oversample(train: Dataset, cfg: SmoteConfig, rng: RngStream | None = None) -> Dataset:
    """Original rows followed by synthetic defaults (label 1, donor's period, row_id -1)."""
    synthetic, _, _ = smote_samples(train, cfg, rng)
    if len(synthetic) == 0:
        return train
    return concat([train, synthetic])
