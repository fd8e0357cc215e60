"""Cross-entropy plus a quadratic "potential energy" penalty on the parameters.

    total(theta) = bce(theta) + lam * 0.5 * ||theta||^2

The penalty covers every registry tensor, biases included, unless
``exclude_bias`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import MlpParams, backward, forward
from .numerics import ShapeError, as_tensor, squared_norm

PROB_EPS = 1e-12


@dataclass(frozen=True)
class LossConfig:
    lam: float = 0.01
    exclude_bias: bool = False

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class LossBreakdown:
    base: float
    reg: float
    total: float


def _check_labels(labels, n: int) -> np.ndarray:
    y = as_tensor(labels)
    if y.shape != (n,):
        raise ShapeError(f"labels shape {y.shape} does not match {n} predictions")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return y


def bce_loss(probs, labels) -> float:
    p = as_tensor(probs)
    if p.ndim != 1:
        raise ShapeError(f"probs must be 1-D, got shape {p.shape}")
    y = _check_labels(labels, p.shape[0])
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def bce_grad_logits(probs, labels) -> np.ndarray:
    """d(mean BCE)/d(logit) for sigmoid outputs: (p - y) / n."""
    p = as_tensor(probs)
    y = _check_labels(labels, p.shape[0])
    return (p - y) / p.shape[0]


def _penalized(params: MlpParams, exclude_bias: bool):
    for name, t in params:
        if exclude_bias and name.endswith(".bias"):
            continue
        yield name, t


def l2_regularizer(params: MlpParams, exclude_bias: bool = False) -> float:
    return 0.5 * sum(squared_norm(t) for _, t in _penalized(params, exclude_bias))


def hamiltonian_loss(probs, labels, params: MlpParams, cfg: LossConfig) -> LossBreakdown:
    base = bce_loss(probs, labels)
    reg = l2_regularizer(params, cfg.exclude_bias)
    return LossBreakdown(base, reg, base + cfg.lam * reg)


def add_regularizer_grad(grads: dict, params: MlpParams, cfg: LossConfig) -> dict:
    """Return ``grads`` plus lam * theta for every penalized tensor."""
    out = dict(grads)
    if cfg.lam == 0:
        return out
    for name, t in _penalized(params, cfg.exclude_bias):
        out[name] = out[name] + cfg.lam * t
    return out


def loss_and_grads(params: MlpParams, x, labels, cfg: LossConfig, rng=None, train: bool = False):
    """Forward, loss breakdown and full gradient in one pass."""
    probs, cache = forward(params, x, rng=rng, train=train)
    breakdown = hamiltonian_loss(probs, labels, params, cfg)
    grads = backward(params, cache, dloss_dlogit=bce_grad_logits(probs, labels))
    return breakdown, add_regularizer_grad(grads, params, cfg), probs
