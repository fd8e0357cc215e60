"""Central-difference gradient oracle, independent of the analytic backward pass."""

import numpy as np

from hamcredit.loss import LossConfig, hamiltonian_loss
from hamcredit.mlp import forward


def total_loss(params, x, y, lam):
    cfg = lam if isinstance(lam, LossConfig) else LossConfig(lam)
    probs, _ = forward(params, x)
    return hamiltonian_loss(probs, y, params, cfg).total


def numeric_grads(params, x, y, lam, h=1e-6):
    out = {}
    for name, t in params:
        g = np.zeros_like(t)
        flat = t.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            plus = total_loss(params, x, y, lam)
            flat[i] = old - h
            minus = total_loss(params, x, y, lam)
            flat[i] = old
            g.reshape(-1)[i] = (plus - minus) / (2 * h)
        out[name] = g
    return out


def max_relative_error(analytic, numeric):
    worst = 0.0
    for name in numeric:
        a, n = analytic[name], numeric[name]
        err = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-4)
        worst = max(worst, float(err.max()))
    return worst
