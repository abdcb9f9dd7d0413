"""Linear base classifiers trained by (sub)gradient descent.

Logistic regression gives a probability-native base model; the linear SVM
produces unbounded decision scores that go through the score-to-probability
adapter before thresholding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import FeatureMatrix


@dataclass
class LinearConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class LinearModel:
    """Weights + bias of a trained linear classifier.

    ``kind`` records which loss produced it: "logistic" models expose
    calibrated-ish probabilities through the sigmoid, "svm" models expose raw
    decision scores w.x + b.
    """

    weights: np.ndarray
    bias: float
    kind: str

    def __post_init__(self):
        if self.kind not in ("logistic", "svm"):
            raise ValueError(f"unknown linear model kind {self.kind!r}")
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != len(self.weights):
            raise ValueError(
                f"feature width {X.shape[1]} does not match model width {len(self.weights)}"
            )
        return X @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Positive-class probability; defined for logistic models only."""
        if self.kind != "logistic":
            raise ValueError("predict_proba is only defined for logistic models")
        return _sigmoid(self.decision_scores(X))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # numerically stable; outputs clipped to stay strictly inside (0, 1)
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, 1e-12, 1.0 - 1e-12)


def _check_two_classes(data: FeatureMatrix, what: str):
    if data.n_samples == 0:
        raise ValueError(f"{what}: training data is empty")
    if len(np.unique(data.labels)) < 2:
        raise ValueError(f"{what}: training data contains a single class")


def train_logistic(data: FeatureMatrix, cfg: LinearConfig | None = None) -> LinearModel:
    """Fit logistic regression by full-batch gradient descent.

    Weights start at zero, so the run is deterministic irrespective of the
    seed; the seed stays in the config for interface symmetry with the other
    trainers.
    """
    cfg = cfg or LinearConfig()
    _check_two_classes(data, "train_logistic")
    X, y = data.values, data.labels.astype(np.float64)
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(cfg.epochs):
        p = _sigmoid(X @ w + b)
        err = p - y
        grad_w = X.T @ err / n + cfg.l2 * w
        grad_b = float(err.mean())
        w -= cfg.learning_rate * grad_w
        b -= cfg.learning_rate * grad_b
    return LinearModel(weights=w, bias=b, kind="logistic")


@dataclass
class SvmConfig:
    learning_rate: float = 0.05
    epochs: int = 300
    regularization: float = 1e-4
    seed: int = 0


def train_linear_svm(data: FeatureMatrix, cfg: SvmConfig | None = None) -> LinearModel:
    """Fit a linear SVM by subgradient descent on the L2-regularised hinge loss.

    Zero epochs leave the zero-initialised parameters untouched (all scores
    equal the bias).
    """
    cfg = cfg or SvmConfig()
    _check_two_classes(data, "train_linear_svm")
    X = data.values
    y = np.where(data.labels == 1, 1.0, -1.0)
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(cfg.epochs):
        margins = y * (X @ w + b)
        viol = margins < 1.0
        # subgradient of mean hinge + (reg/2)*||w||^2
        grad_w = cfg.regularization * w - (X[viol].T @ y[viol]) / n
        grad_b = -float(y[viol].sum()) / n
        w -= cfg.learning_rate * grad_w
        b -= cfg.learning_rate * grad_b
    return LinearModel(weights=w, bias=b, kind="svm")
