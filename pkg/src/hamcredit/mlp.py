"""Feed-forward binary classifier with manual forward and backward passes."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import RngStream, ShapeError, as_tensor

ACTIVATIONS = ("leaky_relu", "relu", "tanh")


class StaleCacheError(RuntimeError):
    """A ForwardCache was used with parameters it was not computed from."""


@dataclass(frozen=True)
class LayerSpec:
    input_dim: int
    hidden_dims: tuple[int, ...] = (128, 64)
    dropout_rate: float = 0.2
    activation: str = "leaky_relu"
    slope: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1 or any(h < 1 for h in self.hidden_dims):
            raise ValueError(f"layer sizes must be >= 1: {self.input_dim}, {self.hidden_dims}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; choose from {ACTIVATIONS}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per dense layer, output layer included."""
        dims = [self.input_dim, *self.hidden_dims, 1]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class MlpParams:
    """Ordered registry of parameter tensors.

    Names are ``layer{i}.weight`` (shape out x in) and ``layer{i}.bias``.
    ``version`` is bumped by anything that mutates the tensors so stale
    forward caches can be detected.
    """

    spec: LayerSpec
    tensors: dict[str, np.ndarray]
    version: int = 0

    def names(self) -> list[str]:
        return list(self.tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __iter__(self):
        return iter(self.tensors.items())

    def __len__(self):
        return len(self.tensors)

    @property
    def n_layers(self) -> int:
        return len(self.spec.layer_dims)

    def weight(self, i: int) -> np.ndarray:
        return self.tensors[f"layer{i}.weight"]

    def bias(self, i: int) -> np.ndarray:
        return self.tensors[f"layer{i}.bias"]

    def copy(self) -> "MlpParams":
        return MlpParams(self.spec, {k: v.copy() for k, v in self.tensors.items()}, self.version)

    def touch(self) -> None:
        self.version += 1

    def n_params(self) -> int:
        return sum(t.size for t in self.tensors.values())


def init_params(spec: LayerSpec, rng: RngStream) -> MlpParams:
    """He-normal weights, zero biases."""
    tensors = {}
    for i, (fan_in, fan_out) in enumerate(spec.layer_dims):
        std = np.sqrt(2.0 / fan_in)
        tensors[f"layer{i}.weight"] = rng.normal(0.0, std, size=(fan_out, fan_in))
        tensors[f"layer{i}.bias"] = np.zeros(fan_out)
    return MlpParams(spec, tensors)


def leaky_relu(x, slope: float = 0.01):
    if np.isscalar(x):
        return x if x >= 0 else slope * x
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, x, slope * x)


def _activate(z: np.ndarray, spec: LayerSpec) -> np.ndarray:
    if spec.activation == "leaky_relu":
        return np.where(z >= 0, z, spec.slope * z)
    if spec.activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_grad(z: np.ndarray, spec: LayerSpec) -> np.ndarray:
    if spec.activation == "leaky_relu":
        return np.where(z >= 0, 1.0, spec.slope)
    if spec.activation == "relu":
        return (z > 0).astype(np.float64)
    return 1.0 - np.tanh(z) ** 2


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]  # input to each dense layer (post-dropout)
    pre_activations: list[np.ndarray]
    masks: list[np.ndarray | None]  # scaled keep masks, None when no dropout
    logits: np.ndarray
    probs: np.ndarray
    params_id: int = 0
    params_version: int = 0
    extra: dict = field(default_factory=dict)


def forward(params: MlpParams, x, rng: RngStream | None = None, train: bool = False):
    """Return (probs, cache). Dropout only when ``train`` is set, using ``rng``."""
    spec = params.spec
    x = as_tensor(x)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeError(f"expected input of width {spec.input_dim}, got shape {x.shape}")
    if train and spec.dropout_rate > 0 and rng is None:
        raise ValueError("train mode with dropout needs an rng")

    keep = 1.0 - spec.dropout_rate
    inputs, pres, masks = [], [], []
    a = x
    last = params.n_layers - 1
    for i in range(params.n_layers):
        inputs.append(a)
        z = a @ params.weight(i).T + params.bias(i)
        pres.append(z)
        if i == last:
            break
        a = _activate(z, spec)
        if train and spec.dropout_rate > 0:
            # inverted dropout: scale kept units by 1/keep at train time
            mask = (rng.random(a.shape) < keep) / keep
            a = a * mask
            masks.append(mask)
        else:
            masks.append(None)
    logits = pres[-1][:, 0]
    probs = sigmoid(logits)
    cache = ForwardCache(inputs, pres, masks, logits, probs, id(params), params.version)
    return probs, cache


def backward(params: MlpParams, cache: ForwardCache, dloss_dprob=None, *, dloss_dlogit=None):
    """Gradients of a scalar loss w.r.t. every registry tensor.

    Pass either the derivative with respect to the output probabilities or,
    for numerical robustness when the sigmoid saturates, with respect to the
    output logits.
    """
    if cache.params_id != id(params) or cache.params_version != params.version:
        raise StaleCacheError("forward cache does not belong to the current parameters")
    if (dloss_dprob is None) == (dloss_dlogit is None):
        raise ValueError("give exactly one of dloss_dprob / dloss_dlogit")
    batch = cache.probs.shape[0]
    if dloss_dlogit is None:
        d = as_tensor(dloss_dprob)
        if d.shape != (batch,):
            raise ShapeError(f"dloss_dprob must have shape ({batch},), got {d.shape}")
        p = cache.probs
        dz = d * p * (1.0 - p)
    else:
        dz = as_tensor(dloss_dlogit)
        if dz.shape != (batch,):
            raise ShapeError(f"dloss_dlogit must have shape ({batch},), got {dz.shape}")

    spec = params.spec
    grads = {}
    delta = dz[:, None]
    for i in reversed(range(params.n_layers)):
        grads[f"layer{i}.weight"] = delta.T @ cache.inputs[i]
        grads[f"layer{i}.bias"] = delta.sum(axis=0)
        if i == 0:
            break
        da = delta @ params.weight(i)
        if cache.masks[i - 1] is not None:
            da = da * cache.masks[i - 1]
        delta = da * _activation_grad(cache.pre_activations[i - 1], spec)
    return {name: grads[name] for name in params.names()}


def predict_proba(params: MlpParams, x) -> np.ndarray:
    probs, _ = forward(params, x)
    return probs


# Snapshot format (text, bit-exact):
#   hamcredit-params 1
#   spec <input_dim> <activation> <slope hex> <dropout hex> <hidden dims...>
#   tensor <name> <ndim> <dims...>
#   <row-major values as float.hex, space separated>
# repeated per registry tensor, in registry order.


def save_params(params: MlpParams, path) -> None:
    s = params.spec
    lines = [
        "hamcredit-params 1",
        " ".join(["spec", str(s.input_dim), s.activation, float(s.slope).hex(),
                  float(s.dropout_rate).hex(), *map(str, s.hidden_dims)]),
    ]
    for name, t in params:
        lines.append(" ".join(["tensor", name, str(t.ndim), *map(str, t.shape)]))
        lines.append(" ".join(float(v).hex() for v in t.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path) -> MlpParams:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "hamcredit-params 1":
        raise ValueError(f"{path}: not a parameter snapshot")
    head = lines[1].split()
    if head[0] != "spec":
        raise ValueError(f"{path}: missing spec line")
    spec = LayerSpec(
        input_dim=int(head[1]),
        activation=head[2],
        slope=float.fromhex(head[3]),
        dropout_rate=float.fromhex(head[4]),
        hidden_dims=tuple(int(h) for h in head[5:]),
    )
    tensors = {}
    i = 2
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        if parts[0] != "tensor":
            raise ValueError(f"{path}:{i + 1}: expected tensor header")
        name, ndim = parts[1], int(parts[2])
        shape = tuple(int(d) for d in parts[3:3 + ndim])
        values = [float.fromhex(v) for v in lines[i + 1].split()] if i + 1 < len(lines) else []
        if len(values) != int(np.prod(shape)):
            raise ValueError(f"{path}:{i + 2}: {name} has {len(values)} values for shape {shape}")
        tensors[name] = np.array(values, dtype=np.float64).reshape(shape)
        i += 2
    params = MlpParams(spec, tensors)
    expected = init_params(spec, RngStream(0))
    if expected.names() != params.names() or any(
        expected[n].shape != params[n].shape for n in expected.names()
    ):
        raise ValueError(f"{path}: tensors do not match the stored layer spec")
    return params
