"""Evaluation metrics: micro-averaged F1 and rank-based AUC."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


def micro_f1(pred, truth) -> float:
    """Micro-averaged F1 over globally pooled per-class TP/FP/FN.

    With exactly one predicted class per item (single-label multi-class),
    pooled FP equals pooled FN and the score reduces to plain accuracy.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("empty prediction list")
    classes = np.union1d(pred, truth)
    tp = fp = fn = 0
    for c in classes:
        tp += int(np.sum((pred == c) & (truth == c)))
        fp += int(np.sum((pred == c) & (truth != c)))
        fn += int(np.sum((pred != c) & (truth == c)))
    if tp == 0:
        return 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg), ties counted one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"length mismatch: {scores.shape} vs {labels.shape}")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)  # average ranks on ties
    rank_sum = float(ranks[pos].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)
