"""Loss values against loop-written oracles; gradients against central differences."""
import numpy as np
import pytest
from conftest import numeric_gradient, relative_error
from scipy.special import logsumexp

from guidedboost.nn.losses import bce_loss, supcon_loss

TOL = 1e-4


def oracle_supcon(Z, y, tau):
    """Direct per-anchor loop translation of the loss definition."""
    n = len(y)
    total = 0.0
    for i in range(n):
        positives = [p for p in range(n) if p != i and y[p] == y[i]]
        if not positives:
            continue
        others = [a for a in range(n) if a != i]
        lse = logsumexp([Z[i] @ Z[a] / tau for a in others])
        s = sum(Z[i] @ Z[p] / tau - lse for p in positives)
        total += -s / len(positives)
    return total / n


def unit_rows(rng, n, d):
    Z = rng.normal(size=(n, d))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def test_supcon_matches_loop_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        d = int(rng.integers(2, 6))
        Z = unit_rows(rng, n, d)
        y = rng.integers(0, 2, size=n)
        loss, _ = supcon_loss(Z, y, 0.07)
        assert loss == pytest.approx(oracle_supcon(Z, y, 0.07), rel=1e-10, abs=1e-10)


def test_supcon_anchor_without_positives_contributes_zero():
    rng = np.random.default_rng(1)
    Z = unit_rows(rng, 3, 4)
    y = np.array([0, 1, 1])  # anchor 0 has no same-label partner
    loss, _ = supcon_loss(Z, y, 0.07)
    assert loss == pytest.approx(oracle_supcon(Z, y, 0.07))
    # all anchors positive-free: loss and gradient are exactly zero
    loss2, grad2 = supcon_loss(Z[:2], np.array([0, 1]), 0.07)
    assert loss2 == 0.0
    assert np.all(grad2 == 0.0)


def test_supcon_permutation_invariance():
    rng = np.random.default_rng(2)
    Z = unit_rows(rng, 8, 3)
    y = np.array([0, 0, 1, 1, 0, 1, 0, 1])
    base, _ = supcon_loss(Z, y, 0.07)
    for _ in range(5):
        perm = rng.permutation(8)
        shuffled, _ = supcon_loss(Z[perm], y[perm], 0.07)
        assert shuffled == pytest.approx(base, rel=1e-9)


def test_supcon_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        d = int(rng.integers(2, 5))
        Z = unit_rows(rng, n, d)
        y = rng.integers(0, 2, size=n)
        _, grad = supcon_loss(Z, y, 0.07)
        numeric = numeric_gradient(lambda: supcon_loss(Z, y, 0.07)[0], Z)
        assert relative_error(grad, numeric) < TOL


def test_supcon_validation():
    Z = np.eye(2)
    with pytest.raises(ValueError):
        supcon_loss(Z[:1], np.array([0]))
    with pytest.raises(ValueError):
        supcon_loss(Z, np.array([0, 1]), temperature=0.0)


def test_bce_hand_values():
    loss, grad = bce_loss(np.array([[0.5, 0.5]]), np.array([[1.0, 0.0]]))
    assert loss == pytest.approx(np.log(2.0))
    # d/do of the mean over 2 units: (o - t) / (o(1-o)) / 2
    assert grad[0, 0] == pytest.approx((0.5 - 1.0) / 0.25 / 2)
    assert grad[0, 1] == pytest.approx((0.5 - 0.0) / 0.25 / 2)


def test_bce_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    o = rng.uniform(0.05, 0.95, size=(5, 2))
    t = rng.integers(0, 2, size=(5, 2)).astype(float)
    _, grad = bce_loss(o, t)
    numeric = numeric_gradient(lambda: bce_loss(o, t)[0], o)
    assert relative_error(grad, numeric) < TOL


def test_bce_clips_saturated_outputs():
    loss, grad = bce_loss(np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]]))
    assert np.isfinite(loss)
    assert np.all(np.isfinite(grad))
    with pytest.raises(ValueError):
        bce_loss(np.zeros((2, 2)), np.zeros((2, 3)))
