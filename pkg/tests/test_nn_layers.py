"""Layer-level checks: value oracles and finite-difference gradients."""
import numpy as np
import pytest
from conftest import numeric_gradient, relative_error

from guidedboost.nn.layers import BatchNorm, L2Normalize, Linear, ReLU, Sigmoid

TOL = 1e-4


def loss_through(layer, x, R, train=True):
    """Scalar probe loss sum(forward(x) * R) for gradient checking."""
    return float(np.sum(layer.forward(x, train) * R))


def test_linear_init_and_forward():
    rng = np.random.default_rng(0)
    layer = Linear(4, 3, rng)
    limit = np.sqrt(6.0 / 4)
    assert np.all(np.abs(layer.W) <= limit)
    assert np.all(layer.b == 0.0)
    x = np.random.default_rng(1).normal(size=(5, 4))
    assert np.allclose(layer.forward(x, False), x @ layer.W + layer.b)
    with pytest.raises(ValueError):
        layer.forward(np.zeros((2, 7)), False)
    with pytest.raises(ValueError):
        Linear(0, 3, rng)


def test_linear_gradients():
    rng = np.random.default_rng(2)
    layer = Linear(4, 3, rng)
    x = rng.normal(size=(6, 4))
    R = rng.normal(size=(6, 3))
    layer.forward(x, True)
    gx = layer.backward(R)
    assert relative_error(gx, numeric_gradient(lambda: loss_through(layer, x, R), x)) < TOL
    assert relative_error(layer.gW, numeric_gradient(lambda: loss_through(layer, x, R), layer.W)) < TOL
    assert relative_error(layer.gb, numeric_gradient(lambda: loss_through(layer, x, R), layer.b)) < TOL


def test_linear_backward_requires_training_forward():
    layer = Linear(2, 2, np.random.default_rng(0))
    layer.forward(np.zeros((2, 2)), False)
    with pytest.raises(RuntimeError):
        layer.backward(np.zeros((2, 2)))


def test_batchnorm_training_statistics():
    layer = BatchNorm(3)
    x = np.random.default_rng(3).normal(loc=5.0, scale=2.0, size=(50, 3))
    out = layer.forward(x, True)
    assert np.allclose(out.mean(axis=0), 0.0, atol=1e-10)
    # biased variance in the denominator: output variance is var/(var + eps)
    assert np.allclose(out.var(axis=0), x.var(axis=0) / (x.var(axis=0) + 1e-5))


def test_batchnorm_running_stats_update_rule():
    layer = BatchNorm(2, momentum=0.9)
    x = np.array([[1.0, 10.0], [3.0, 30.0]])
    layer.forward(x, True)
    assert np.allclose(layer.running_mean, 0.9 * 0.0 + 0.1 * np.array([2.0, 20.0]))
    assert np.allclose(layer.running_var, 0.9 * 1.0 + 0.1 * np.array([1.0, 100.0]))
    # eval mode normalizes with the running stats, not the batch stats
    out = layer.forward(x, False)
    expected = (x - layer.running_mean) / np.sqrt(layer.running_var + 1e-5)
    assert np.allclose(out, expected)


def test_batchnorm_gradients():
    rng = np.random.default_rng(4)
    layer = BatchNorm(3)
    layer.gamma[:] = rng.normal(size=3)
    layer.beta[:] = rng.normal(size=3)
    x = rng.normal(size=(6, 3))
    R = rng.normal(size=(6, 3))
    layer.forward(x, True)
    gx = layer.backward(R)
    assert relative_error(gx, numeric_gradient(lambda: loss_through(layer, x, R), x)) < TOL
    assert relative_error(
        layer.g_gamma, numeric_gradient(lambda: loss_through(layer, x, R), layer.gamma)
    ) < TOL
    assert relative_error(
        layer.g_beta, numeric_gradient(lambda: loss_through(layer, x, R), layer.beta)
    ) < TOL


def test_batchnorm_backward_requires_training_forward():
    layer = BatchNorm(2)
    layer.forward(np.zeros((3, 2)), False)
    with pytest.raises(RuntimeError):
        layer.backward(np.zeros((3, 2)))


def test_relu_and_sigmoid_values_and_gradients():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(5, 4))
    R = rng.normal(size=(5, 4))

    relu = ReLU()
    assert np.array_equal(relu.forward(x, False), np.maximum(x, 0.0))
    relu.forward(x, True)
    gx = relu.backward(R)
    assert relative_error(gx, numeric_gradient(lambda: loss_through(relu, x, R), x)) < TOL

    sig = Sigmoid()
    out = sig.forward(x, False)
    assert np.allclose(out, 1.0 / (1.0 + np.exp(-x)))
    # stable on extreme inputs
    extreme = sig.forward(np.array([[-800.0, 800.0]]), False)
    assert np.all(np.isfinite(extreme))
    sig.forward(x, True)
    gx = sig.backward(R)
    assert relative_error(gx, numeric_gradient(lambda: loss_through(sig, x, R), x)) < TOL


def test_l2_normalize_values_and_gradients():
    rng = np.random.default_rng(6)
    layer = L2Normalize()
    x = rng.normal(size=(5, 3))
    out = layer.forward(x, False)
    assert np.allclose(np.linalg.norm(out, axis=1), 1.0)

    with_zero = np.vstack([x, np.zeros((1, 3))])
    out = layer.forward(with_zero, False)
    assert np.all(out[-1] == 0.0)

    R = rng.normal(size=(5, 3))
    layer.forward(x, True)
    gx = layer.backward(R)
    assert relative_error(gx, numeric_gradient(lambda: loss_through(layer, x, R), x)) < TOL
