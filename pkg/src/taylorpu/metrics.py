"""Binary classification metrics with explicit zero-division conventions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    oa: float


def confusion(preds, labels) -> Metrics:
    """Confusion counts and derived scores for binary predictions.

    Precision, recall and F1 are defined as 0 whenever their denominator
    is 0.  ``oa`` is plain accuracy.
    """
    p = np.asarray(preds).reshape(-1).astype(np.int64)
    y = np.asarray(labels).reshape(-1).astype(np.int64)
    if p.size == 0:
        raise ValueError("preds must be non-empty")
    if p.size != y.size:
        raise ValueError(f"length mismatch: {p.size} preds vs {y.size} labels")
    tp = int(np.sum((p == 1) & (y == 1)))
    fp = int(np.sum((p == 1) & (y == 0)))
    fn = int(np.sum((p == 0) & (y == 1)))
    tn = int(np.sum((p == 0) & (y == 0)))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    oa = (tp + tn) / p.size
    return Metrics(tp=tp, fp=fp, fn=fn, tn=tn, precision=precision, recall=recall, f1=f1, oa=oa)


def macro_f1(per_class_f1) -> float:
    """Arithmetic mean of per-class F1 scores."""
    values = np.asarray(per_class_f1, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValueError("per_class_f1 must be non-empty")
    return float(np.mean(values))


def mean_std(values) -> tuple[float, float]:
    """Sample mean and standard deviation (n-1 denominator).

    A single value has standard deviation 0 by convention.
    """
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValueError("values must be non-empty")
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(np.mean(arr)), float(np.std(arr, ddof=1))
