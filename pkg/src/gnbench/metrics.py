"""Evaluation metrics."""

from __future__ import annotations

import numpy as np

from .errors import MetricError, ParameterError


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their run."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties count half.

    Computed as the Mann-Whitney rank statistic, so ties are exact rather
    than threshold-swept.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape[0] != labels.shape[0]:
        raise ParameterError("scores and labels must have equal length")
    if not np.all((labels == 0) | (labels == 1)):
        raise ParameterError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC AUC requires both classes present")
    ranks = _average_ranks(scores)
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def accuracy(predicted, labels) -> float:
    """Fraction of exact matches."""
    predicted = np.asarray(predicted).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if predicted.shape[0] != labels.shape[0]:
        raise ParameterError("predictions and labels must have equal length")
    if predicted.shape[0] == 0:
        raise ParameterError("accuracy of an empty batch is undefined")
    return float(np.mean(predicted == labels))
