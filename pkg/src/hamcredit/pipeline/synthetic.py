"""Synthetic loan data whose default mechanism drifts over origination periods.

Features are i.i.d. standard normal. In period ``t`` the default probability is
``sigmoid(w(t) . x + b(t))`` where

    w(t) = signal * (cos(a t) e1 + sin(a t) e2),   a = drift_magnitude * horizon_months / 12

for a random orthonormal pair (e1, e2), so the coefficient vector rotates at a
constant angular rate per period and longer performance windows accumulate
more rotation. ``b(t)`` is found by bisection so the period's mean default
probability equals ``base_default_rate``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mlp import sigmoid
from ..numerics import RngStream
from .dataset import Dataset

HORIZONS = (12, 36, 60)


@dataclass(frozen=True)
class DriftGenConfig:
    n_rows: int = 20000
    n_features: int = 10
    base_default_rate: float = 0.1
    drift_magnitude: float = 0.05
    n_periods: int = 10
    horizon_months: int = 12
    seed: int = 0
    signal: float = 2.0

    def __post_init__(self):
        problems = []
        if self.n_rows < 1:
            problems.append("n_rows must be >= 1")
        if self.n_features < 2:
            problems.append("n_features must be >= 2")
        if not 0 < self.base_default_rate < 1:
            problems.append("base_default_rate must be in (0, 1)")
        if not self.drift_magnitude >= 0:
            problems.append("drift_magnitude must be >= 0")
        if self.n_periods < 1:
            problems.append("n_periods must be >= 1")
        if self.horizon_months not in HORIZONS:
            problems.append(f"horizon_months must be one of {HORIZONS}")
        if not self.signal >= 0:
            problems.append("signal must be >= 0")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def angular_rate(self) -> float:
        return self.drift_magnitude * self.horizon_months / 12.0


def coefficient_basis(cfg: DriftGenConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = RngStream(cfg.seed).spawn(1)
    a = rng.normal(size=cfg.n_features)
    e1 = a / np.linalg.norm(a)
    b = rng.normal(size=cfg.n_features)
    b = b - np.dot(b, e1) * e1
    return e1, b / np.linalg.norm(b)


def coefficients(cfg: DriftGenConfig, period: int) -> np.ndarray:
    e1, e2 = coefficient_basis(cfg)
    angle = cfg.angular_rate * period
    return cfg.signal * (np.cos(angle) * e1 + np.sin(angle) * e2)


def calibrate_intercept(scores: np.ndarray, rate: float, tol: float = 1e-12) -> float:
    """Intercept b with mean(sigmoid(scores + b)) == rate, by bisection."""
    lo, hi = -50.0, 50.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sigmoid(scores + mid).mean() < rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def synthesize_credit_data(cfg: DriftGenConfig) -> Dataset:
    root = RngStream(cfg.seed)
    x = root.spawn(2).normal(size=(cfg.n_rows, cfg.n_features))
    sizes = np.full(cfg.n_periods, cfg.n_rows // cfg.n_periods)
    sizes[: cfg.n_rows % cfg.n_periods] += 1
    periods = np.repeat(np.arange(cfg.n_periods), sizes)

    u = root.spawn(3).random(cfg.n_rows)
    labels = np.zeros(cfg.n_rows, dtype=np.int64)
    for t in range(cfg.n_periods):
        rows = periods == t
        if not rows.any():
            continue
        z = x[rows] @ coefficients(cfg, t)
        b = calibrate_intercept(z, cfg.base_default_rate)
        labels[rows] = (u[rows] < sigmoid(z + b)).astype(np.int64)

    names = tuple(f"x{i}" for i in range(cfg.n_features))
    return Dataset(x, labels, periods, names)
