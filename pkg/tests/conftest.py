"""Shared test helpers: dataset builders and numeric gradient checking."""
import numpy as np

from guidedboost.data import FeatureMatrix


def make_blobs(n_per_class=50, n_features=3, gap=6.0, scale=1.0, seed=0):
    """Two well-separated Gaussian blobs, class 0 below class 1."""
    rng = np.random.default_rng(seed)
    neg = rng.normal(-gap / 2.0, scale, size=(n_per_class, n_features))
    pos = rng.normal(gap / 2.0, scale, size=(n_per_class, n_features))
    values = np.vstack([neg, pos])
    labels = np.concatenate(
        [np.zeros(n_per_class, dtype=np.int64), np.ones(n_per_class, dtype=np.int64)]
    )
    return FeatureMatrix.from_arrays(values, labels)


def numeric_gradient(f, x, h=1e-5):
    """Central-difference gradient of scalar f at x, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + h
        up = f()
        x[idx] = old - h
        down = f()
        x[idx] = old
        g[idx] = (up - down) / (2.0 * h)
        it.iternext()
    return g


def relative_error(analytic, numeric):
    """Max elementwise |a - n| / max(|a|, |n|, 1e-6)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
    return float(np.max(np.abs(a - n) / denom))
