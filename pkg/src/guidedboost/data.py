"""Core data types shared across the pipeline.

Datasets, per-sample prediction reports, calibrated threshold pairs and the
easy/difficult and confusion partitions they induce. All types are immutable
after construction (array buffers are frozen), so they can be shared freely
between parallel workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONFUSION_TAGS = ("TP", "FP", "TN", "FN")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FeatureMatrix:
    """A tabular dataset with binary labels and stable sample ids.

    ``values`` is a dense (n_samples, n_features) float64 matrix. ``ids`` are
    unique integers assigned once at load time; subsets keep the original id
    values so that index sets computed on one view stay meaningful on any
    other view of the same data.
    """

    values: np.ndarray
    labels: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        values = _frozen(np.asarray(self.values, dtype=np.float64))
        labels = _frozen(np.asarray(self.labels, dtype=np.int64))
        ids = _frozen(np.asarray(self.ids, dtype=np.int64))
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if labels.shape != (values.shape[0],):
            raise ValueError(
                f"labels length {labels.shape} does not match {values.shape[0]} samples"
            )
        if ids.shape != (values.shape[0],):
            raise ValueError("ids length does not match number of samples")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("ids must be unique")
        if not np.isfinite(values).all():
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_arrays(cls, values, labels) -> "FeatureMatrix":
        """Build a matrix with dense ids 0..n-1 assigned by row order."""
        values = np.asarray(values, dtype=np.float64)
        return cls(values=values, labels=np.asarray(labels), ids=np.arange(len(values)))

    def subset(self, positions: np.ndarray) -> "FeatureMatrix":
        """Row subset by positional index; original ids are preserved."""
        positions = np.asarray(positions, dtype=np.int64)
        return FeatureMatrix(
            values=self.values[positions],
            labels=self.labels[positions],
            ids=self.ids[positions],
        )

    def subset_by_ids(self, wanted_ids) -> "FeatureMatrix":
        """Row subset by id membership, rows kept in current order."""
        mask = np.isin(self.ids, np.fromiter(wanted_ids, dtype=np.int64, count=-1))
        return self.subset(np.flatnonzero(mask))

    def positions_of(self, wanted_ids: np.ndarray) -> np.ndarray:
        """Positional indices of the given ids, in the given order."""
        lookup = {int(i): pos for pos, i in enumerate(self.ids)}
        try:
            return np.array([lookup[int(i)] for i in wanted_ids], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"id {exc} not present in this matrix") from None

    def with_features(self, kept: np.ndarray) -> "FeatureMatrix":
        """Column subset (feature selection); labels and ids unchanged."""
        return FeatureMatrix(
            values=self.values[:, np.asarray(kept, dtype=np.int64)],
            labels=self.labels,
            ids=self.ids,
        )


@dataclass(frozen=True)
class PredictionReport:
    """Per-sample positive-class probability, binary prediction and confusion tag.

    ``prediction == 1`` iff ``probability >= 0.5``; a probability of exactly
    0.5 is predicted positive. Confusion tags are relative to the true labels
    supplied at construction.
    """

    ids: np.ndarray
    probabilities: np.ndarray
    predictions: np.ndarray
    confusion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ids", _frozen(np.asarray(self.ids, dtype=np.int64)))
        object.__setattr__(
            self, "probabilities", _frozen(np.asarray(self.probabilities, dtype=np.float64))
        )
        object.__setattr__(
            self, "predictions", _frozen(np.asarray(self.predictions, dtype=np.int64))
        )
        object.__setattr__(self, "confusion", _frozen(np.asarray(self.confusion, dtype="<U2")))
        n = len(self.ids)
        for name in ("probabilities", "predictions", "confusion"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length does not match ids")
        expected = (self.probabilities >= 0.5).astype(np.int64)
        if not np.array_equal(expected, self.predictions):
            raise ValueError("predictions inconsistent with probabilities (p >= 0.5 rule)")

    @property
    def n_samples(self) -> int:
        return len(self.ids)


def prediction_report(probabilities, labels, ids) -> PredictionReport:
    """Assemble a PredictionReport from probabilities and true labels."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    if not (len(probabilities) == len(labels) == len(ids)):
        raise ValueError("probabilities, labels and ids must have equal length")
    if probabilities.size and (probabilities.min() < 0.0 or probabilities.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    predictions = (probabilities >= 0.5).astype(np.int64)
    tags = np.empty(len(ids), dtype="<U2")
    tags[(predictions == 1) & (labels == 1)] = "TP"
    tags[(predictions == 1) & (labels == 0)] = "FP"
    tags[(predictions == 0) & (labels == 0)] = "TN"
    tags[(predictions == 0) & (labels == 1)] = "FN"
    return PredictionReport(
        ids=ids, probabilities=probabilities, predictions=predictions, confusion=tags
    )


@dataclass(frozen=True)
class ThresholdPair:
    """Calibrated probability thresholds bounding the difficult interval.

    Samples with probability <= th_n or >= th_p are easy; everything strictly
    inside (th_n, th_p) is difficult. The 0.5 boundary counts as a positive
    prediction, so th_n = 0.5 claims only the strict negative side.
    """

    th_n: float
    th_p: float

    def __post_init__(self):
        if not (0.0 <= self.th_n <= 0.5 <= self.th_p <= 1.0):
            raise ValueError(
                f"need 0 <= th_n <= 0.5 <= th_p <= 1, got ({self.th_n}, {self.th_p})"
            )


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive easy/difficult id sets over one dataset."""

    easy_ids: frozenset = field(default_factory=frozenset)
    difficult_ids: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "easy_ids", frozenset(int(i) for i in self.easy_ids))
        object.__setattr__(
            self, "difficult_ids", frozenset(int(i) for i in self.difficult_ids)
        )
        if self.easy_ids & self.difficult_ids:
            raise ValueError("easy and difficult id sets overlap")


@dataclass(frozen=True)
class ConfusionPartition:
    """The TP/FP/TN/FN id sets of one classifier on one dataset."""

    tp_ids: frozenset
    fp_ids: frozenset
    tn_ids: frozenset
    fn_ids: frozenset

    def __post_init__(self):
        for name in ("tp_ids", "fp_ids", "tn_ids", "fn_ids"):
            object.__setattr__(self, name, frozenset(int(i) for i in getattr(self, name)))
        sets = [self.tp_ids, self.fp_ids, self.tn_ids, self.fn_ids]
        total = sum(len(s) for s in sets)
        if len(frozenset().union(*sets)) != total:
            raise ValueError("confusion cells are not pairwise disjoint")

    @property
    def all_ids(self) -> frozenset:
        return self.tp_ids | self.fp_ids | self.tn_ids | self.fn_ids

    @property
    def error_ids(self) -> frozenset:
        return self.fp_ids | self.fn_ids


def confusion_partition(report: PredictionReport, labels) -> ConfusionPartition:
    """Split the report's ids into TP/FP/TN/FN sets against the given labels.

    ``labels`` must align with ``report.ids`` element-wise.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) != report.n_samples:
        raise ValueError(
            f"labels length {len(labels)} does not match report length {report.n_samples}"
        )
    preds = report.predictions
    ids = report.ids
    return ConfusionPartition(
        tp_ids=frozenset(ids[(preds == 1) & (labels == 1)].tolist()),
        fp_ids=frozenset(ids[(preds == 1) & (labels == 0)].tolist()),
        tn_ids=frozenset(ids[(preds == 0) & (labels == 0)].tolist()),
        fn_ids=frozenset(ids[(preds == 0) & (labels == 1)].tolist()),
    )
