"""Rank and threshold metrics for binary scores."""
from __future__ import annotations

import numpy as np

from ..errors import DataError


def _split(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).astype(bool).ravel()
    if s.shape != y.shape:
        raise DataError("scores and labels disagree in length")
    return s, y


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: (correctly ordered pairs + half the tied pairs) / (#pos * #neg)."""
    s, y = _split(scores, labels)
    pos, neg = s[y], np.sort(s[~y])
    if pos.size == 0 or neg.size == 0:
        raise DataError("roc_auc needs both classes")
    below = np.searchsorted(neg, pos, side="left")
    at_or_below = np.searchsorted(neg, pos, side="right")
    # integer arithmetic until the final division
    twice = int((below + at_or_below).sum())
    return twice / (2.0 * pos.size * neg.size)


def confusion(scores, labels, threshold: float = 0.5) -> tuple[int, int, int, int]:
    """(TP, FP, FN, TN) with ``score >= threshold`` predicted positive."""
    s, y = _split(scores, labels)
    pred = s >= threshold
    tp = int((pred & y).sum())
    fp = int((pred & ~y).sum())
    fn = int((~pred & y).sum())
    tn = int((~pred & ~y).sum())
    return tp, fp, fn, tn


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


def metrics_from_confusion(tp: int, fp: int, fn: int, tn: int) -> tuple[float, float, float, float]:
    accuracy = _ratio(tp + tn, tp + fp + fn + tn)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)
    return accuracy, f1, _ratio(tp, tp + fn), _ratio(tn, tn + fp)


def threshold_metrics(scores, labels, threshold: float = 0.5) -> tuple[float, float, float, float]:
    """(accuracy, f1, sensitivity, specificity); zero denominators give 0."""
    return metrics_from_confusion(*confusion(scores, labels, threshold))
