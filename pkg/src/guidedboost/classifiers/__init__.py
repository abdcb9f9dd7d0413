"""Base classifiers and the probability adapters that make them routable."""
from .adapters import (
    ForestAdapter,
    KnnAdapter,
    LogisticAdapter,
    ScoreRange,
    SvmAdapter,
    decision_to_probability,
    error_proxy_probabilities,
    train_error_proxy,
)
from .forest import ForestConfig, ForestModel, train_random_forest
from .knn import NearestNeighborModel, knn_predict
from .linear import LinearConfig, LinearModel, SvmConfig, train_linear_svm, train_logistic

__all__ = [
    "ForestAdapter",
    "ForestConfig",
    "ForestModel",
    "KnnAdapter",
    "LinearConfig",
    "LinearModel",
    "LogisticAdapter",
    "NearestNeighborModel",
    "ScoreRange",
    "SvmAdapter",
    "SvmConfig",
    "decision_to_probability",
    "error_proxy_probabilities",
    "knn_predict",
    "train_error_proxy",
    "train_linear_svm",
    "train_logistic",
    "train_random_forest",
]
