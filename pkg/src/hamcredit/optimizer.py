"""Energy-normalized momentum optimizer and a heavy-ball SGD baseline.

For every parameter tensor ``theta`` with gradient ``g``::

    v     <- beta * v + (1 - beta) * g
    K     <- 0.5 * ||v||^2            (from the updated momentum)
    V     <- 0.5 * ||theta||^2        (from the pre-update parameters)
    H     <- K + V
    theta <- theta - eta * v / sqrt(H + eps)

H is the *sum* of the two energies. One scalar H per tensor unless
``global_h`` is set, in which case all tensors share H summed over the model.
Because H >= K, each tensor moves by at most eta * sqrt(2) per step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .mlp import MlpParams
from .numerics import check_same_shape, squared_norm

GLOBAL_KEY = "*"


@dataclass(frozen=True)
class OptimConfig:
    eta: float = 0.01
    beta: float = 0.9
    epsilon: float = 1e-8
    global_h: bool = False

    def __post_init__(self):
        problems = []
        if not self.eta > 0:
            problems.append(f"eta must be > 0, got {self.eta}")
        if not 0 <= self.beta < 1:
            problems.append(f"beta must be in [0, 1), got {self.beta}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be > 0, got {self.epsilon}")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class EnergyTriple:
    K: float
    V: float
    H: float


@dataclass
class ParamState:
    momentum: dict[str, np.ndarray] = field(default_factory=dict)
    energy: dict[str, EnergyTriple] = field(default_factory=dict)
    steps: int = 0

    @classmethod
    def zeros_like(cls, params) -> "ParamState":
        return cls({name: np.zeros_like(t) for name, t in _items(params)})


def _items(params):
    if isinstance(params, MlpParams):
        return list(params)
    return list(params.items())


def _tensors(params) -> dict:
    return params.tensors if isinstance(params, MlpParams) else params


def momentum_update(v, g, beta: float) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(v, g, "momentum and gradient")
    return beta * v + (1.0 - beta) * g


def compute_energy(theta, v) -> EnergyTriple:
    theta = np.asarray(theta, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    check_same_shape(theta, v, "parameter and momentum")
    K = 0.5 * squared_norm(v)
    V = 0.5 * squared_norm(theta)
    return EnergyTriple(K, V, K + V)


def apply_update(theta, v, cfg: OptimConfig, H: float) -> np.ndarray:
    if H < 0:
        raise ValueError(f"H must be nonnegative, got {H}")
    return theta - cfg.eta * v / math.sqrt(H + cfg.epsilon)


def _prepare(params, grads: Mapping, state: ParamState):
    items = _items(params)
    missing = [name for name, _ in items if name not in grads]
    if missing:
        raise KeyError(f"no gradient for parameter(s): {', '.join(missing)}")
    for name, t in items:
        if name not in state.momentum:
            state.momentum[name] = np.zeros_like(t)
    return items


def step(
    params,
    grads: Mapping[str, np.ndarray],
    state: ParamState,
    cfg: OptimConfig,
    energy_fn: Callable[[np.ndarray, np.ndarray], EnergyTriple] = compute_energy,
) -> dict[str, EnergyTriple]:
    """One optimizer iteration, in place. Returns the energy triple per tensor."""
    items = _prepare(params, grads, state)
    tensors = _tensors(params)
    new_v = {name: momentum_update(state.momentum[name], grads[name], cfg.beta) for name, _ in items}
    trace = {name: energy_fn(theta, new_v[name]) for name, theta in items}

    if cfg.global_h:
        K = sum(e.K for e in trace.values())
        V = sum(e.V for e in trace.values())
        trace[GLOBAL_KEY] = EnergyTriple(K, V, K + V)

    for name, theta in items:
        H = trace[GLOBAL_KEY].H if cfg.global_h else trace[name].H
        tensors[name] = apply_update(theta, new_v[name], cfg, H)
        state.momentum[name] = new_v[name]
    state.energy = trace
    state.steps += 1
    if isinstance(params, MlpParams):
        params.touch()
    return trace


def sgd_momentum_step(params, grads: Mapping[str, np.ndarray], state: ParamState,
                      eta: float, beta: float) -> dict[str, EnergyTriple]:
    """Classical heavy ball: v <- beta v + g; theta <- theta - eta v.

    The returned energies are diagnostic only; they do not affect the update.
    """
    items = _prepare(params, grads, state)
    tensors = _tensors(params)
    trace = {}
    for name, theta in items:
        g = np.asarray(grads[name], dtype=np.float64)
        check_same_shape(theta, g, name)
        v = beta * state.momentum[name] + g
        trace[name] = compute_energy(theta, v)
        tensors[name] = theta - eta * v
        state.momentum[name] = v
    state.energy = trace
    state.steps += 1
    if isinstance(params, MlpParams):
        params.touch()
    return trace


class Optimizer:
    """Binds an update rule to its configuration and state."""

    def __init__(self, kind: str, cfg: OptimConfig):
        if kind not in ("symplectic", "sgd_momentum"):
            raise ValueError(f"unknown optimizer kind {kind!r}")
        self.kind = kind
        self.cfg = cfg
        self.state = ParamState()

    def step(self, params, grads) -> dict[str, EnergyTriple]:
        if self.kind == "symplectic":
            return step(params, grads, self.state, self.cfg)
        return sgd_momentum_step(params, grads, self.state, self.cfg.eta, self.cfg.beta)


ENERGY_TRACE_COLUMNS = ("step", "tensor_name", "K", "V", "H")


def write_energy_trace(rows, path) -> None:
    """``rows``: iterable of (step, tensor_name, EnergyTriple)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_TRACE_COLUMNS)
        for s, name, e in rows:
            w.writerow([s, name, repr(e.K), repr(e.V), repr(e.H)])


def read_energy_trace(path) -> list[tuple[int, str, EnergyTriple]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ENERGY_TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return [
            (int(r["step"]), r["tensor_name"], EnergyTriple(float(r["K"]), float(r["V"]), float(r["H"])))
            for r in reader
        ]
