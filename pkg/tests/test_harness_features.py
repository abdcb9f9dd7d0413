"""Class-separation feature ranking against a hand-written t-score oracle."""
import numpy as np
import pytest

from guidedboost.data import FeatureMatrix
from guidedboost.harness.features import feature_scores, feature_select_topk


def oracle_scores(values, labels):
    neg, pos = values[labels == 0], values[labels == 1]
    n0, n1 = len(neg), len(pos)
    out = np.empty(values.shape[1])
    for j in range(values.shape[1]):
        var = (n0 * neg[:, j].var() + n1 * pos[:, j].var()) / (n0 + n1)
        out[j] = abs(pos[:, j].mean() - neg[:, j].mean()) / max(np.sqrt(var), 1e-12)
    return out


def _matrix(values, labels):
    return FeatureMatrix.from_arrays(np.asarray(values, dtype=float), np.asarray(labels))


def test_scores_hand_example():
    data = _matrix([[0, 7], [2, 7], [3, 7], [5, 7]], [0, 0, 1, 1])
    scores = feature_scores(data)
    # feature 0: means 1 vs 4, pooled biased var 1 -> score 3; feature 1 constant -> 0
    assert scores == pytest.approx([3.0, 0.0])


def test_scores_match_oracle_random():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(4, 40))
        d = int(rng.integers(1, 8))
        labels = np.zeros(n, dtype=np.int64)
        labels[: int(rng.integers(1, n))] = 1
        rng.shuffle(labels)
        if labels.min() == labels.max():
            continue
        values = rng.normal(size=(n, d)) * rng.uniform(0.1, 5.0, size=d)
        data = _matrix(values, labels)
        assert np.allclose(feature_scores(data), oracle_scores(values, labels))


def test_topk_keeps_best_and_sorts_indices():
    values = [[0.0, 10.0, 0.1], [0.1, 20.0, 0.0], [5.0, 30.0, 0.1], [5.1, 40.0, 0.0]]
    data = _matrix(values, [0, 0, 1, 1])
    kept, (reduced,) = feature_select_topk(data, 2)
    scores = feature_scores(data)
    assert set(kept) == set(np.argsort(-scores)[:2])
    assert np.all(np.diff(kept) > 0)
    assert np.array_equal(reduced.values, data.values[:, kept])
    assert np.array_equal(reduced.ids, data.ids)


def test_topk_tie_goes_to_lower_index():
    col = np.array([0.0, 1.0, 4.0, 5.0])
    data = _matrix(np.column_stack([col, col]), [0, 0, 1, 1])
    kept, _ = feature_select_topk(data, 1)
    assert kept.tolist() == [0]


def test_topk_full_width_is_identity():
    rng = np.random.default_rng(3)
    data = _matrix(rng.normal(size=(10, 4)), [0, 1] * 5)
    kept, (reduced,) = feature_select_topk(data, 4)
    assert np.array_equal(kept, np.arange(4))
    assert np.array_equal(reduced.values, data.values)


def test_topk_scores_come_from_train_only():
    train = _matrix([[0.0, -1.0], [0.1, 1.0], [9.0, -1.0], [9.1, 1.0]], [0, 0, 1, 1])
    # in the other split feature 1 separates perfectly, feature 0 not at all
    other = _matrix([[5.0, -9.0], [5.0, 9.0]], [0, 1])
    kept, (_, reduced_other) = feature_select_topk(train, 1, other)
    assert kept.tolist() == [0]
    assert np.array_equal(reduced_other.values, other.values[:, [0]])


def test_topk_reduces_every_matrix():
    rng = np.random.default_rng(4)
    train = _matrix(rng.normal(size=(12, 5)), [0, 1] * 6)
    a = _matrix(rng.normal(size=(3, 5)), [0, 1, 0])
    b = _matrix(rng.normal(size=(4, 5)), [1, 1, 0, 0])
    kept, reduced = feature_select_topk(train, 3, a, b)
    assert len(reduced) == 3
    for original, cut in zip((train, a, b), reduced):
        assert cut.n_features == 3
        assert np.array_equal(cut.values, original.values[:, kept])


def test_validation():
    data = _matrix([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1])
    with pytest.raises(ValueError, match="k must lie in"):
        feature_select_topk(data, 0)
    with pytest.raises(ValueError, match="k must lie in"):
        feature_select_topk(data, 2)
    single = _matrix([[1.0], [2.0]], [1, 1])
    with pytest.raises(ValueError, match="both classes"):
        feature_scores(single)
