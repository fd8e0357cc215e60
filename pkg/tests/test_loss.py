import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradcheck import max_relative_error, numeric_grads
from hamcredit.experiment.config import default_config
from hamcredit.loss import LossConfig, bce_loss, hamiltonian_loss, l2_regularizer, loss_and_grads
from hamcredit.mlp import LayerSpec, MlpParams, init_params
from hamcredit.numerics import RngStream, ShapeError


def single(values):
    t = np.array(values, dtype=float)
    return MlpParams(LayerSpec(1, ()), {"layer0.weight": t.reshape(1, -1)[:, :1], "layer0.bias": t[1:]})


def test_bce_half():
    assert bce_loss([0.5], [1]) == pytest.approx(math.log(2), abs=1e-15)


def test_bce_perfect_prediction():
    assert bce_loss([1.0, 0.0, 1.0], [1, 0, 1]) < 1e-11


def test_bce_worked_example():
    assert bce_loss([0.9, 0.2], [1, 0]) == pytest.approx(0.5 * (-math.log(0.9) - math.log(0.8)), abs=1e-15)
    assert bce_loss([0.9, 0.2], [1, 0]) == pytest.approx(0.164252, abs=5e-7)


def test_bce_errors():
    with pytest.raises(ShapeError):
        bce_loss([0.5, 0.5], [1])
    with pytest.raises(ValueError):
        bce_loss([0.5], [2])


def test_regularizer_values():
    p = single([3.0, 4.0])
    assert l2_regularizer(p) == 12.5
    for n in p.names():
        p.tensors[n] = 2 * p.tensors[n]
    assert l2_regularizer(p) == 50.0
    zero = single([0.0, 0.0])
    assert l2_regularizer(zero) == 0.0
    assert l2_regularizer(single([3.0, 4.0]), exclude_bias=True) == 4.5


def test_breakdown_composition():
    p = single([3.0, 4.0])
    b = hamiltonian_loss([0.5], [1], p, LossConfig(0.01))
    assert b.reg == 12.5
    assert b.total == pytest.approx(b.base + 0.01 * 12.5, abs=1e-12)
    assert hamiltonian_loss([0.5], [1], p, LossConfig(0.0)).total == b.base


def test_worked_total():
    # base 0.5, reg 12.5, lambda 0.01 -> 0.625
    assert 0.5 + 0.01 * 12.5 == pytest.approx(0.625, abs=1e-15)


def test_table1_lambda_is_default():
    assert default_config().loss_config() == LossConfig(0.01)


def test_negative_lambda_rejected():
    with pytest.raises(ValueError):
        LossConfig(-0.1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10), st.integers(0, 1000))
def test_monotone_in_lambda(l1, l2, seed):
    p = init_params(LayerSpec(3, (4,)), RngStream(seed))
    probs = np.random.default_rng(seed).uniform(0.05, 0.95, size=6)
    y = np.array([0, 1, 0, 1, 1, 0])
    lo, hi = sorted((l1, l2))
    a = hamiltonian_loss(probs, y, p, LossConfig(lo))
    b = hamiltonian_loss(probs, y, p, LossConfig(hi))
    assert b.total >= a.total
    assert a.total >= a.base


@pytest.mark.parametrize("lam", [0.0, 0.01, 1.0])
@pytest.mark.parametrize("exclude_bias", [False, True])
def test_total_gradient(lam, exclude_bias):
    p = init_params(LayerSpec(3, (4, 3), dropout_rate=0.0), RngStream(11))
    p.tensors["layer0.bias"] += 0.05
    g = np.random.default_rng(3)
    x, y = g.normal(size=(10, 3)), (g.random(10) < 0.4).astype(float)
    cfg = LossConfig(lam, exclude_bias)
    _, analytic, _ = loss_and_grads(p, x, y, cfg)
    num = numeric_grads(p, x, y, cfg)
    assert max_relative_error(analytic, num) < 1e-5
