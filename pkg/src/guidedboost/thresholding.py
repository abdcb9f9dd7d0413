"""Tolerated-error budgets, threshold calibration, and easy/difficult splitting.

Calibration looks at the base classifier's validation mistakes and pushes a
pair of probability thresholds outward from 0.5 until the samples outside
them (the easy set) hold no more than the tolerated number of FPs and FNs.
Everything inside the open interval is difficult and goes to the auxiliary
stage.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .data import ConfusionPartition, SplitAssignment, ThresholdPair


@dataclass(frozen=True)
class ToleranceConfig:
    """Percentage of validation FPs (X) and FNs (Y) allowed into the easy set."""

    X: float = 5.0
    Y: float = 5.0

    def __post_init__(self):
        if not (0.0 <= self.X <= 100.0 and 0.0 <= self.Y <= 100.0):
            raise ValueError("ToleranceConfig: X and Y must lie in [0, 100]")


@dataclass(frozen=True)
class ToleratedCounts:
    tolerated_fps: int
    tolerated_fns: int

    def __post_init__(self):
        if self.tolerated_fps < 0 or self.tolerated_fns < 0:
            raise ValueError("ToleratedCounts: counts must be non-negative")


def tolerated_counts(X: float, Y: float, fp_v: int, fn_v: int) -> ToleratedCounts:
    """floor(X*FP_v/100) and floor(Y*FN_v/100); floor keeps the budget honest."""
    if not (0.0 <= X <= 100.0 and 0.0 <= Y <= 100.0):
        raise ValueError("tolerated_counts: X and Y must lie in [0, 100]")
    if fp_v < 0 or fn_v < 0:
        raise ValueError("tolerated_counts: error counts must be non-negative")
    return ToleratedCounts(
        tolerated_fps=math.floor(X * fp_v / 100.0),
        tolerated_fns=math.floor(Y * fn_v / 100.0),
    )


def _extreme_positive(p: np.ndarray, is_fp: np.ndarray, budget: int) -> float:
    """Smallest cut t with at most `budget` FPs at probability >= t.

    Candidates are the distinct positive-side probabilities plus the 0.5
    floor. When even the highest probability is over budget (an FP tie block
    at the top) the threshold moves just past the top so the easy side is
    empty; a cut above 1.0 is clamped back, which only matters for errors
    sitting at probability exactly 1.0 (they can never be quarantined).
    """
    if p.size == 0 or int(is_fp.sum()) <= budget:
        return 0.5
    order = np.argsort(-p, kind="stable")
    ps = p[order]
    cum = np.cumsum(is_fp[order])
    run_end = np.flatnonzero(np.r_[ps[1:] != ps[:-1], True])
    counts = cum[run_end]  # FPs with p >= each distinct value, values descending
    values = ps[run_end]
    ok = np.flatnonzero(counts <= budget)
    if ok.size == 0:
        return min(float(np.nextafter(values[0], np.inf)), 1.0)
    return float(values[ok.max()])


def _extreme_negative(p: np.ndarray, is_fn: np.ndarray, budget: int) -> float:
    """Mirror image: largest cut t with at most `budget` FNs at p <= t."""
    if p.size == 0 or int(is_fn.sum()) <= budget:
        return 0.5
    order = np.argsort(p, kind="stable")
    ps = p[order]
    cum = np.cumsum(is_fn[order])
    run_end = np.flatnonzero(np.r_[ps[1:] != ps[:-1], True])
    counts = cum[run_end]  # FNs with p <= each distinct value, values ascending
    values = ps[run_end]
    ok = np.flatnonzero(counts <= budget)
    if ok.size == 0:
        return max(float(np.nextafter(values[0], -np.inf)), 0.0)
    return float(values[ok.max()])


def select_thresholds(
    val_probs: np.ndarray,
    ids: np.ndarray,
    fp_ids: frozenset[int] | set[int],
    fn_ids: frozenset[int] | set[int],
    tolerated: ToleratedCounts,
) -> ThresholdPair:
    """Calibrate (th_n, th_p) on validation probabilities.

    th_p is the smallest positive-side cut whose inclusive easy side
    {p >= th_p} holds at most tolerated_fps validation FPs; th_n mirrors it
    for FNs on {p <= th_n}. When the whole side fits the budget the
    threshold collapses to 0.5 (that side is entirely easy); when no cut
    fits, it moves just outside the observed range (that side is entirely
    difficult).

    Args:
        val_probs: base-classifier probabilities on the validation set.
        ids: sample ids aligned with val_probs.
        fp_ids / fn_ids: ids of the base's validation FPs and FNs.
        tolerated: error budget from tolerated_counts.
    """
    p = np.asarray(val_probs, dtype=np.float64)
    ids = np.asarray(ids, dtype=np.int64)
    if p.shape != ids.shape or p.ndim != 1:
        raise ValueError("select_thresholds: probs and ids must be matching 1-D arrays")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("select_thresholds: probabilities outside [0, 1]")
    fp_ids = frozenset(int(i) for i in fp_ids)
    fn_ids = frozenset(int(i) for i in fn_ids)
    known = set(int(i) for i in ids)
    stray = (fp_ids | fn_ids) - known
    if stray:
        raise ValueError(f"select_thresholds: error ids not in validation ids: {sorted(stray)[:5]}")
    is_fp = np.fromiter((int(i) in fp_ids for i in ids), dtype=bool, count=len(ids))
    is_fn = np.fromiter((int(i) in fn_ids for i in ids), dtype=bool, count=len(ids))
    pos = p >= 0.5
    th_p = _extreme_positive(p[pos], is_fp[pos], tolerated.tolerated_fps)
    th_n = _extreme_negative(p[~pos], is_fn[~pos], tolerated.tolerated_fns)
    return ThresholdPair(th_n=th_n, th_p=th_p)


def split_dataset(
    probs: np.ndarray, thresholds: ThresholdPair, ids: np.ndarray | None = None
) -> SplitAssignment:
    """Partition samples into easy (outside the thresholds, boundary inclusive)
    and difficult (strictly inside the open interval).

    p = 0.5 is a positive prediction, so only th_p can claim it for the easy
    side; letting th_n = 0.5 swallow it would leak boundary FPs past the
    calibrated error budget.
    """
    p = np.asarray(probs, dtype=np.float64)
    if ids is None:
        ids = np.arange(p.size, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    if p.shape != ids.shape or p.ndim != 1:
        raise ValueError("split_dataset: probs and ids must be matching 1-D arrays")
    easy = ((p <= thresholds.th_n) & (p < 0.5)) | (p >= thresholds.th_p)
    return SplitAssignment(
        easy_ids=frozenset(int(i) for i in ids[easy]),
        difficult_ids=frozenset(int(i) for i in ids[~easy]),
    )


@dataclass(frozen=True)
class CurvePoint:
    """One point of the accumulated-error curve: side is 'fn' below 0.5, 'fp' at

    or above; count is the number of that error type captured by the cut."""

    threshold: float
    side: str
    count: int


def accumulated_error_curve(
    probs: np.ndarray,
    ids: np.ndarray,
    confusion: ConfusionPartition,
    grid: np.ndarray,
) -> list[CurvePoint]:
    """Accumulated FNs (p <= t for t < 0.5) and FPs (p >= t for t >= 0.5).

    Sweeping the grid shows how many errors each candidate threshold would
    leave on the easy side, which is what calibration trades off.
    """
    p = np.asarray(probs, dtype=np.float64)
    ids = np.asarray(ids, dtype=np.int64)
    if p.shape != ids.shape or p.ndim != 1:
        raise ValueError("accumulated_error_curve: probs and ids must be matching 1-D arrays")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size and (grid.min() < 0.0 or grid.max() > 1.0):
        raise ValueError("accumulated_error_curve: grid values outside [0, 1]")
    is_fp = np.fromiter((int(i) in confusion.fp_ids for i in ids), dtype=bool, count=len(ids))
    is_fn = np.fromiter((int(i) in confusion.fn_ids for i in ids), dtype=bool, count=len(ids))
    points = []
    for t in grid:
        if t < 0.5:
            points.append(CurvePoint(float(t), "fn", int(np.sum(is_fn & (p <= t)))))
        else:
            points.append(CurvePoint(float(t), "fp", int(np.sum(is_fp & (p >= t)))))
    return points


def curve_to_csv(points: list[CurvePoint]) -> str:
    """Serialize curve points to CSV with columns threshold, side, count."""
    buf = io.StringIO()
    buf.write("threshold,side,count\n")
    for pt in points:
        buf.write(f"{pt.threshold},{pt.side},{pt.count}\n")
    return buf.getvalue()
