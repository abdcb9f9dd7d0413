"""Random forest built on bootstrap-bagged CART trees.

Used both as a probability-native base classifier and as the error proxy that
flags which samples a nearest-neighbour base is likely to get wrong. Trees
split on Gini impurity with midpoint thresholds between consecutive distinct
feature values; every feature is considered at every node.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import FeatureMatrix


@dataclass
class ForestConfig:
    n_trees: int = 50
    max_depth: int = 8
    min_leaf: int = 2
    seed: int = 0


@dataclass(frozen=True)
class _Node:
    """One tree node; leaves carry the positive-class fraction."""

    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    p1: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _gini(n: int, pos: int | float) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Exhaustive midpoint search over all features.

    Returns (feature, threshold, weighted_gini) or None when no split leaves
    at least min_leaf samples on both sides. Ties keep the first candidate in
    scan order (lowest feature index, then lowest threshold).
    """
    n = len(y)
    best = None
    best_score = np.inf
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        prefix_pos = np.cumsum(y[order])
        total_pos = prefix_pos[-1]
        # split after position i keeps i+1 samples on the left
        i = np.arange(min_leaf - 1, n - min_leaf)
        if len(i) == 0:
            continue
        distinct = xs[i] < xs[i + 1]
        i = i[distinct]
        if len(i) == 0:
            continue
        ln = (i + 1).astype(np.float64)
        rn = n - ln
        lp = prefix_pos[i]
        rp = total_pos - lp
        gl = 1.0 - (lp / ln) ** 2 - ((ln - lp) / ln) ** 2
        gr = 1.0 - (rp / rn) ** 2 - ((rn - rp) / rn) ** 2
        scores = (ln * gl + rn * gr) / n
        k = int(np.argmin(scores))
        if scores[k] < best_score:
            best_score = float(scores[k])
            best = (j, float((xs[i[k]] + xs[i[k] + 1]) / 2.0))
    if best is None:
        return None
    return best[0], best[1], best_score


def _grow(X: np.ndarray, y: np.ndarray, depth: int, cfg: ForestConfig) -> _Node:
    n = len(y)
    pos = int(y.sum())
    node_gini = _gini(n, pos)
    if depth >= cfg.max_depth or n < 2 * cfg.min_leaf or node_gini == 0.0:
        return _Node(p1=pos / n)
    found = _best_split(X, y, cfg.min_leaf)
    if found is None or found[2] >= node_gini:
        return _Node(p1=pos / n)
    j, t, _ = found
    go_left = X[:, j] <= t
    return _Node(
        feature=j,
        threshold=t,
        left=_grow(X[go_left], y[go_left], depth + 1, cfg),
        right=_grow(X[~go_left], y[~go_left], depth + 1, cfg),
    )


def _tree_proba(node: _Node, X: np.ndarray, out: np.ndarray, rows: np.ndarray):
    if node.is_leaf:
        out[rows] = node.p1
        return
    go_left = X[rows, node.feature] <= node.threshold
    _tree_proba(node.left, X, out, rows[go_left])
    _tree_proba(node.right, X, out, rows[~go_left])


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[_Node, ...]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Positive-class probability: mean of per-tree leaf fractions."""
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0])
        scratch = np.empty(X.shape[0])
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            _tree_proba(tree, X, scratch, rows)
            acc += scratch
        return acc / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


def forest_to_arrays(model: ForestModel) -> dict[str, np.ndarray]:
    """Flatten all trees into parallel arrays for persistence.

    Children are absolute node indices, -1 marks a leaf; roots lists each
    tree's root index in preorder layout.
    """
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    p1: list[float] = []
    roots: list[int] = []

    def add(node: _Node) -> int:
        idx = len(feature)
        feature.append(node.feature)
        threshold.append(node.threshold)
        p1.append(node.p1)
        left.append(-1)
        right.append(-1)
        if not node.is_leaf:
            left[idx] = add(node.left)
            right[idx] = add(node.right)
        return idx

    for tree in model.trees:
        roots.append(add(tree))
    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "p1": np.asarray(p1, dtype=np.float64),
        "roots": np.asarray(roots, dtype=np.int64),
    }


def forest_from_arrays(arrays: dict[str, np.ndarray]) -> ForestModel:
    """Rebuild a ForestModel from forest_to_arrays output."""
    left = np.asarray(arrays["left"], dtype=np.int64)
    right = np.asarray(arrays["right"], dtype=np.int64)

    def build(i: int) -> _Node:
        if left[i] < 0:
            return _Node(p1=float(arrays["p1"][i]))
        return _Node(
            feature=int(arrays["feature"][i]),
            threshold=float(arrays["threshold"][i]),
            left=build(int(left[i])),
            right=build(int(right[i])),
        )

    return ForestModel(trees=tuple(build(int(r)) for r in arrays["roots"]))


def train_random_forest(data: FeatureMatrix, cfg: ForestConfig | None = None) -> ForestModel:
    """Fit a bagged forest; each tree draws its own bootstrap sample.

    Tree t uses default_rng([seed, t]) so forests are reproducible and
    individual trees stay independent of the total tree count.
    """
    cfg = cfg or ForestConfig()
    if data.n_samples == 0:
        raise ValueError("train_random_forest: training data is empty")
    if cfg.n_trees < 1:
        raise ValueError("train_random_forest: need at least one tree")
    X, y = data.values, data.labels
    n = data.n_samples
    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        rows = rng.integers(0, n, size=n)
        trees.append(_grow(X[rows], y[rows], 0, cfg))
    return ForestModel(trees=tuple(trees))
