"""Probability adapters: turn any base model's outputs into routing probabilities.

Three situations arise:

* probability-native bases (logistic, forest) pass their probabilities through;
* margin bases (linear SVM) map decision scores through a piecewise min-max
  transform anchored at zero;
* degenerate-probability bases (1-NN) get a companion error-proxy forest whose
  zero-probability region defines the easy set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import FeatureMatrix, PredictionReport, ThresholdPair, prediction_report
from .forest import ForestConfig, ForestModel, train_random_forest
from .knn import NearestNeighborModel
from .linear import LinearModel


@dataclass(frozen=True)
class ScoreRange:
    """Observed decision-score extremes plus the target probability range.

    f_min/f_max are taken over the union of all score populations the
    transform will ever see (train, validation and test), so the mapping is
    one fixed function.
    """

    f_min: float
    f_max: float
    p_min: float = 0.0
    p_max: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.f_min) and np.isfinite(self.f_max)):
            raise ValueError("ScoreRange: non-finite score bounds")
        if self.f_min > self.f_max:
            raise ValueError("ScoreRange: f_min exceeds f_max")
        if not (0.0 <= self.p_min <= self.p_max <= 1.0):
            raise ValueError("ScoreRange: need 0 <= p_min <= p_max <= 1")

    @classmethod
    def from_scores(cls, *score_arrays: np.ndarray) -> "ScoreRange":
        pooled = np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in score_arrays])
        if pooled.size == 0:
            raise ValueError("ScoreRange.from_scores: no scores given")
        if not np.isfinite(pooled).all():
            raise ValueError("ScoreRange.from_scores: non-finite score")
        return cls(f_min=float(pooled.min()), f_max=float(pooled.max()))


def decision_to_probability(scores: np.ndarray, rng: ScoreRange) -> np.ndarray:
    """Min-max map applied separately per score sign.

    Negative scores land in [p_min, mid), non-negative in [mid, p_max] where
    mid is the midpoint of the output range, so sign(f) >= 0 iff p >= mid
    (0.5 with the default range) and ordering is preserved on each side. A
    zero-width side maps to the midpoint of its sub-range.
    """
    f = np.asarray(scores, dtype=np.float64)
    if not np.isfinite(f).all():
        raise ValueError("decision_to_probability: non-finite score")
    mid = 0.5 * (rng.p_min + rng.p_max)
    p = np.empty_like(f)
    pos = f >= 0.0
    if rng.f_max > 0.0:
        p[pos] = mid + (rng.p_max - mid) * (f[pos] / rng.f_max)
    else:
        p[pos] = 0.5 * (mid + rng.p_max)
    neg = ~pos
    if rng.f_min < 0.0:
        p[neg] = mid * (1.0 - f[neg] / rng.f_min) + rng.p_min * (f[neg] / rng.f_min)
    else:
        p[neg] = 0.5 * (rng.p_min + mid)
    return np.clip(p, rng.p_min, rng.p_max)


def train_error_proxy(
    data: FeatureMatrix, base_report: PredictionReport, cfg: ForestConfig | None = None
) -> ForestModel:
    """Forest that learns where the base classifier errs.

    Proxy labels: 1 iff the base misclassified the sample. Samples the proxy
    later scores with probability exactly 0 are the ones every tree considers
    safe, and they form the easy set.
    """
    cfg = cfg or ForestConfig()
    positions = {int(i): k for k, i in enumerate(base_report.ids)}
    try:
        rows = np.array([positions[int(i)] for i in data.ids], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"train_error_proxy: base report missing id {exc.args[0]}") from None
    wrong = (base_report.predictions[rows] != data.labels).astype(np.int64)
    proxy = FeatureMatrix(values=data.values, labels=wrong, ids=data.ids)
    return train_random_forest(proxy, cfg)


def error_proxy_probabilities(
    data: FeatureMatrix, base_report: PredictionReport, cfg: ForestConfig | None = None
) -> np.ndarray:
    """Error probability of each sample in data under a freshly trained proxy."""
    return train_error_proxy(data, base_report, cfg).predict_proba(data.values)


class LogisticAdapter:
    """Identity adapter for a probability-native logistic base."""

    fixed_thresholds: ThresholdPair | None = None

    def __init__(self, model: LinearModel):
        if model.kind != "logistic":
            raise ValueError("LogisticAdapter expects a logistic model")
        self.model = model

    def predict_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(X)

    def routing_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(X)


class ForestAdapter:
    """Identity adapter for a probability-native forest base."""

    fixed_thresholds: ThresholdPair | None = None

    def __init__(self, model: ForestModel):
        self.model = model

    def predict_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(X)

    def routing_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(X)


class SvmAdapter:
    """Maps SVM decision scores through the piecewise min-max transform."""

    fixed_thresholds: ThresholdPair | None = None

    def __init__(self, model: LinearModel, score_range: ScoreRange):
        if model.kind != "svm":
            raise ValueError("SvmAdapter expects an svm model")
        self.model = model
        self.score_range = score_range

    @classmethod
    def fit(cls, model: LinearModel, *populations: FeatureMatrix) -> "SvmAdapter":
        """Build the adapter with f_min/f_max over every given score population."""
        scores = [model.decision_scores(m.values) for m in populations if m.n_samples > 0]
        return cls(model, ScoreRange.from_scores(*scores))

    def predict_probabilities(self, X: np.ndarray) -> np.ndarray:
        return decision_to_probability(self.model.decision_scores(X), self.score_range)

    def routing_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.predict_probabilities(X)


class KnnAdapter:
    """1-NN base with an error-proxy forest deciding the routing.

    The base's own probabilities are hard 0/1, so calibration on them is
    meaningless. Instead the proxy's error probability q is folded into a
    routing probability 1 - q/2, which lives in [0.5, 1]; with the fixed
    thresholds (0.0, 1.0) the easy set is exactly {q == 0}.
    """

    def __init__(self, model: NearestNeighborModel, proxy: ForestModel):
        self.model = model
        self.proxy = proxy

    @property
    def fixed_thresholds(self) -> ThresholdPair:
        return ThresholdPair(th_n=0.0, th_p=1.0)

    @classmethod
    def fit(
        cls,
        model: NearestNeighborModel,
        train: FeatureMatrix,
        cfg: ForestConfig | None = None,
    ) -> "KnnAdapter":
        base_report = prediction_report(
            model.predict_proba(train.values), train.labels, train.ids
        )
        return cls(model, train_error_proxy(train, base_report, cfg))

    def predict_probabilities(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(X)

    def routing_probabilities(self, X: np.ndarray) -> np.ndarray:
        return 1.0 - self.proxy.predict_proba(X) / 2.0
