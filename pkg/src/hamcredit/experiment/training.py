"""Mini-batch training with validation early stopping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..loss import hamiltonian_loss, loss_and_grads
from ..mlp import MlpParams, forward, init_params
from ..numerics import RngStream, ShapeError
from ..optimizer import Optimizer
from ..pipeline.dataset import Dataset, audit
from .config import ExperimentConfig

# child-stream indices; shared by both optimizer kinds so ablations see the
# same initial weights, batch order and dropout masks
INIT_STREAM, SHUFFLE_STREAM, DROPOUT_STREAM = 0, 1, 2


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainResult:
    params: MlpParams
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0
    energy_trace: list = field(default_factory=list)

    @property
    def curves(self) -> dict[str, list[float]]:
        return {"train_loss": self.train_loss, "val_loss": self.val_loss}


def validation_loss(params: MlpParams, ds: Dataset, cfg: ExperimentConfig) -> float:
    probs, _ = forward(params, ds.features)
    return hamiltonian_loss(probs, ds.labels, params, cfg.loss_config()).total


def run_training(cfg: ExperimentConfig, train: Dataset, val: Dataset, rng: RngStream,
                 record_energy: bool = False) -> TrainResult:
    """Train until validation loss stalls for more than ``patience`` epochs.

    Returns the parameters of the best validation epoch. ``patience = 0``
    stops at the first epoch that fails to improve.
    """
    audit("train", train)
    audit("early_stopping", val)
    if len(train) == 0 or len(val) == 0:
        raise ValueError("training and validation sets must be non-empty")
    if train.n_features != val.n_features:
        raise ShapeError(f"train has {train.n_features} features, validation {val.n_features}")
    spec = cfg.layer_spec(train.n_features)
    loss_cfg = cfg.loss_config()
    opt = Optimizer(cfg.optimizer.kind, cfg.optim_config())
    t = cfg.training

    params = init_params(spec, rng.spawn(INIT_STREAM))
    shuffle_rng = rng.spawn(SHUFFLE_STREAM)
    dropout_rng = rng.spawn(DROPOUT_STREAM)
    result = TrainResult(params.copy())
    best = math.inf
    stale = 0
    step_no = 0
    x, y = train.features, train.labels

    for epoch in range(t.max_epochs):
        order = shuffle_rng.permutation(len(train))
        batch_losses = []
        for start in range(0, len(order), t.batch_size):
            idx = order[start:start + t.batch_size]
            breakdown, grads, _ = loss_and_grads(params, x[idx], y[idx], loss_cfg, dropout_rng, train=True)
            if not math.isfinite(breakdown.total):
                raise TrainingError(
                    f"non-finite training loss at epoch {epoch}, step {step_no}: "
                    f"base={breakdown.base}, reg={breakdown.reg}"
                )
            trace = opt.step(params, grads)
            step_no += 1
            if record_energy:
                result.energy_trace.extend((step_no, name, e) for name, e in trace.items())
            batch_losses.append(breakdown.total)

        vloss = validation_loss(params, val, cfg)
        if not math.isfinite(vloss):
            raise TrainingError(f"non-finite validation loss at epoch {epoch}")
        result.train_loss.append(float(np.mean(batch_losses)))
        result.val_loss.append(vloss)
        result.epochs_run = epoch + 1
        if vloss < best:
            best = vloss
            stale = 0
            result.params = params.copy()
            result.best_epoch = epoch
        else:
            stale += 1
            if stale > t.patience:
                break
    return result
