"""Score-to-probability transform, error-proxy routing, and base adapters."""
import numpy as np
import pytest
from conftest import make_blobs

from guidedboost.classifiers.adapters import (
    ForestAdapter,
    KnnAdapter,
    LogisticAdapter,
    ScoreRange,
    SvmAdapter,
    decision_to_probability,
    error_proxy_probabilities,
    train_error_proxy,
)
from guidedboost.classifiers.forest import ForestConfig, train_random_forest
from guidedboost.classifiers.knn import NearestNeighborModel
from guidedboost.classifiers.linear import train_linear_svm, train_logistic
from guidedboost.data import FeatureMatrix, ThresholdPair, prediction_report
from guidedboost.thresholding import split_dataset


# ------------------------------------------------------------- transform

def test_transform_anchor_points():
    rng = ScoreRange(f_min=-4.0, f_max=2.0)
    p = decision_to_probability(np.array([0.0, 2.0, -4.0, -2.0, 1.0]), rng)
    assert p[0] == 0.5  # sign boundary
    assert p[1] == 1.0  # f_max
    assert p[2] == 0.0  # f_min
    assert p[3] == 0.25  # halfway down the negative side
    assert p[4] == 0.75  # halfway up the positive side


def test_transform_degenerate_sides_map_to_subrange_midpoints():
    all_positive = ScoreRange(f_min=0.0, f_max=5.0)
    assert decision_to_probability(np.array([-1.0]), all_positive)[0] == 0.25
    all_negative = ScoreRange(f_min=-5.0, f_max=0.0)
    assert decision_to_probability(np.array([0.0, 3.0]), all_negative)[0] == 0.75
    assert decision_to_probability(np.array([0.0, 3.0]), all_negative)[1] == 0.75


def test_transform_rejects_non_finite():
    rng = ScoreRange(-1.0, 1.0)
    with pytest.raises(ValueError):
        decision_to_probability(np.array([np.nan]), rng)
    with pytest.raises(ValueError):
        decision_to_probability(np.array([np.inf]), rng)


def test_transform_contract_on_random_vectors():
    gen = np.random.default_rng(3)
    for _ in range(50):
        scores = gen.normal(scale=gen.uniform(0.1, 10.0), size=int(gen.integers(2, 120)))
        rng = ScoreRange.from_scores(scores)
        p = decision_to_probability(scores, rng)
        assert p.min() >= 0.0 and p.max() <= 1.0
        # sign agreement: binary predictions unchanged by the transform
        assert np.array_equal(p >= 0.5, scores >= 0.0)
        # order preservation with equality only at identical scores
        order = np.argsort(scores, kind="stable")
        ds = np.diff(scores[order])
        dp = np.diff(p[order])
        assert np.all(dp[ds > 0] > 0.0)
        assert np.all(dp[ds == 0] == 0.0)


def test_score_range_construction():
    r = ScoreRange.from_scores(np.array([-1.0, 2.0]), np.array([5.0]), np.array([0.5]))
    assert r.f_min == -1.0 and r.f_max == 5.0
    assert r.p_min == 0.0 and r.p_max == 1.0
    with pytest.raises(ValueError):
        ScoreRange.from_scores()
    with pytest.raises(ValueError):
        ScoreRange.from_scores(np.array([np.nan]))
    with pytest.raises(ValueError):
        ScoreRange(2.0, 1.0)
    with pytest.raises(ValueError):
        ScoreRange(0.0, 1.0, p_min=0.9, p_max=0.1)


# ----------------------------------------------------------- error proxy

def _planted_error_setup():
    """Base report wrong exactly on the low cluster, right on the high one."""
    rng = np.random.default_rng(5)
    low = rng.uniform(0.0, 1.0, size=(30, 1))
    high = rng.uniform(10.0, 11.0, size=(30, 1))
    values = np.vstack([low, high])
    labels = np.zeros(60, dtype=np.int64)
    preds = np.concatenate([np.ones(30), np.zeros(30)])  # wrong on the low cluster
    report = prediction_report(preds, labels, np.arange(60))
    data = FeatureMatrix.from_arrays(values, labels)
    return data, report


def test_error_proxy_zero_when_base_is_perfect():
    data = make_blobs(n_per_class=20, seed=2)
    report = prediction_report(data.labels.astype(float), data.labels, data.ids)
    probs = error_proxy_probabilities(data, report, ForestConfig(n_trees=10, seed=1))
    assert np.all(probs == 0.0)


def test_error_proxy_flags_planted_error_region():
    data, report = _planted_error_setup()
    probs = error_proxy_probabilities(data, report, ForestConfig(n_trees=20, seed=3))
    assert np.all(probs[:30] >= 0.5)  # the region the base gets wrong
    assert np.all(probs[30:] == 0.0)  # clean region: every tree agrees


def test_error_proxy_constant_forest_kills_easy_set():
    data, report = _planted_error_setup()
    probs = error_proxy_probabilities(
        data, report, ForestConfig(n_trees=1, max_depth=0, seed=0)
    )
    assert len(np.unique(probs)) == 1
    assert probs[0] > 0.0


def test_error_proxy_requires_report_coverage():
    data, report = _planted_error_setup()
    shifted = FeatureMatrix(values=data.values, labels=data.labels, ids=data.ids + 1000)
    with pytest.raises(ValueError):
        train_error_proxy(shifted, report)


# -------------------------------------------------------------- adapters

def test_logistic_adapter_is_identity():
    data = make_blobs(seed=0)
    model = train_logistic(data)
    adapter = LogisticAdapter(model)
    assert adapter.fixed_thresholds is None
    assert np.array_equal(
        adapter.predict_probabilities(data.values), model.predict_proba(data.values)
    )
    assert np.array_equal(
        adapter.routing_probabilities(data.values), adapter.predict_probabilities(data.values)
    )
    with pytest.raises(ValueError):
        LogisticAdapter(train_linear_svm(data))


def test_forest_adapter_is_identity():
    data = make_blobs(seed=1)
    model = train_random_forest(data, ForestConfig(n_trees=5, seed=2))
    adapter = ForestAdapter(model)
    assert adapter.fixed_thresholds is None
    assert np.array_equal(
        adapter.predict_probabilities(data.values), model.predict_proba(data.values)
    )


def test_svm_adapter_pools_all_populations():
    train = make_blobs(n_per_class=30, seed=3)
    val = make_blobs(n_per_class=5, seed=4)
    test = make_blobs(n_per_class=5, seed=5)
    model = train_linear_svm(train)
    adapter = SvmAdapter.fit(model, train, val, test)
    pooled = np.concatenate(
        [model.decision_scores(m.values) for m in (train, val, test)]
    )
    assert adapter.score_range.f_min == pooled.min()
    assert adapter.score_range.f_max == pooled.max()
    assert adapter.fixed_thresholds is None
    p = adapter.predict_probabilities(test.values)
    assert np.array_equal(p, adapter.routing_probabilities(test.values))
    assert np.array_equal(p >= 0.5, model.decision_scores(test.values) >= 0.0)
    with pytest.raises(ValueError):
        SvmAdapter(train_logistic(train), adapter.score_range)


def test_knn_adapter_routing_and_fixed_thresholds():
    data, report = _planted_error_setup()
    # make the 1-NN base actually wrong on the low cluster by flipping labels
    labeled = FeatureMatrix(
        values=data.values,
        labels=np.concatenate([np.ones(30, dtype=np.int64), np.zeros(30, dtype=np.int64)]),
        ids=data.ids,
    )
    model = NearestNeighborModel.fit(labeled)
    adapter = KnnAdapter.fit(model, labeled, ForestConfig(n_trees=20, seed=7))
    assert adapter.fixed_thresholds == ThresholdPair(0.0, 1.0)

    q = adapter.proxy.predict_proba(labeled.values)
    routing = adapter.routing_probabilities(labeled.values)
    assert np.array_equal(routing, 1.0 - q / 2.0)
    assert routing.min() >= 0.5

    # with the fixed thresholds the easy set is exactly the q == 0 region
    assignment = split_dataset(routing, adapter.fixed_thresholds, labeled.ids)
    assert assignment.easy_ids == frozenset(int(i) for i in labeled.ids[q == 0.0])

    preds = adapter.predict_probabilities(labeled.values)
    assert set(np.unique(preds)) <= {0.0, 1.0}
