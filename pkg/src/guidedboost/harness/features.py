"""Feature selection: class-separation ranking computed on training data only."""
from __future__ import annotations

import numpy as np

from ..data import FeatureMatrix

STD_FLOOR = 1e-12


def feature_scores(train: FeatureMatrix) -> np.ndarray:
    """|class-mean difference| / pooled std per feature (t-statistic magnitude).

    Pooled std uses count-weighted biased variances and is floored so
    constant features score zero instead of dividing by zero.
    """
    pos = train.values[train.labels == 1]
    neg = train.values[train.labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("feature_scores: both classes must be present")
    n0, n1 = len(neg), len(pos)
    pooled_var = (n0 * neg.var(axis=0) + n1 * pos.var(axis=0)) / (n0 + n1)
    pooled_std = np.maximum(np.sqrt(pooled_var), STD_FLOOR)
    return np.abs(pos.mean(axis=0) - neg.mean(axis=0)) / pooled_std


def feature_select_topk(
    train: FeatureMatrix, k: int, *others: FeatureMatrix
) -> tuple[np.ndarray, tuple[FeatureMatrix, ...]]:
    """Keep the k best-scoring features; ties go to the lower index.

    Scores come from the training split alone; the same column subset is
    applied to every given matrix. Returns (kept indices ascending, reduced
    matrices for train and each of others, in order).
    """
    if not (1 <= k <= train.n_features):
        raise ValueError(
            f"feature_select_topk: k must lie in [1, {train.n_features}], got {k}"
        )
    scores = feature_scores(train)
    order = np.lexsort((np.arange(train.n_features), -scores))
    kept = np.sort(order[:k])
    reduced = tuple(m.with_features(kept) for m in (train, *others))
    return kept, reduced
