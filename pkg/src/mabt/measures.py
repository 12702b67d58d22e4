"""Weighted performance measures for binary classifiers.

Both measures accept a probability vector over the evaluation observations,
which is what lets the bootstrap (weights ``counts / n``) and the tilting
family (weights ``p(tau)``) share a single implementation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

WEIGHT_TOL = 1e-12


class MeasureKind(str, enum.Enum):
    ACCURACY = "accuracy"
    AUC = "auc"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown measure {value!r}; expected 'accuracy' or 'auc'"
            ) from None


@dataclass(frozen=True)
class EvaluationTable:
    """True labels and per-model predictions on the hold-out evaluation set.

    Parameters
    ----------
    labels : array_like of shape (n,)
        Binary class labels.
    predictions : array_like of shape (n, m)
        One column per model: predicted labels (accuracy) or scores (AUC).
    model_ids : sequence of str, optional
        Column identifiers; defaults to ``m0, m1, ...``.
    """

    labels: np.ndarray
    predictions: np.ndarray
    model_ids: tuple = field(default=())

    def __post_init__(self):
        labels = np.asarray(self.labels)
        preds = np.asarray(self.predictions, dtype=float)
        if preds.ndim == 1:
            preds = preds[:, None]
        if labels.ndim != 1 or preds.ndim != 2:
            raise ValueError("labels must be 1-d and predictions 2-d")
        if labels.shape[0] != preds.shape[0]:
            raise ValueError(
                f"labels have {labels.shape[0]} rows, predictions {preds.shape[0]}"
            )
        if labels.shape[0] < 2:
            raise ValueError("at least 2 evaluation observations are required")
        if preds.shape[1] < 1:
            raise ValueError("at least one prediction column is required")
        if not np.all(np.isfinite(preds)):
            raise ValueError("predictions contain missing or non-finite entries")
        labels = check_binary(labels, "labels")
        ids = tuple(str(i) for i in self.model_ids) or tuple(
            f"m{j}" for j in range(preds.shape[1])
        )
        if len(ids) != preds.shape[1]:
            raise ValueError(
                f"{len(ids)} model ids given for {preds.shape[1]} prediction columns"
            )
        if len(set(ids)) != len(ids):
            raise ValueError("model ids must be distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "predictions", preds)
        object.__setattr__(self, "model_ids", ids)

    @property
    def n(self):
        return self.labels.shape[0]

    @property
    def m(self):
        return self.predictions.shape[1]

    def column(self, model):
        """Return the prediction column of ``model`` (id or integer index)."""
        return self.predictions[:, self.index(model)]

    def index(self, model):
        if isinstance(model, (int, np.integer)):
            if not 0 <= model < self.m:
                raise IndexError(f"model index {model} out of range")
            return int(model)
        try:
            return self.model_ids.index(str(model))
        except ValueError:
            raise KeyError(f"unknown model id {model!r}") from None

    def check_kind(self, kind):
        kind = MeasureKind.parse(kind)
        if kind is MeasureKind.ACCURACY:
            check_binary(self.predictions, "predictions")
        elif self.labels.min() == self.labels.max():
            raise ValueError("AUC requires both classes in the labels")
        return kind


def check_binary(values, name="values"):
    arr = np.asarray(values)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0/1 entries")
    return arr.astype(np.int8)


def check_weights(w, n):
    """Validate a weight vector of length ``n`` and renormalise it to sum 1."""
    if w is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    total = w.sum()
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights sum to {total!r}, not 1")
    return w / total


def _pair_kernel(pos_scores, neg_scores):
    """Mann-Whitney kernel: 1 if pos > neg, 1/2 on ties, 0 otherwise."""
    diff = pos_scores[:, None] - neg_scores[None, :]
    return (diff > 0) + 0.5 * (diff == 0)


def weighted_accuracy(labels, preds, w=None):
    """Weighted share of correct predictions, ``sum_i w_i * [pred_i == y_i]``."""
    labels = check_binary(labels, "labels")
    preds = check_binary(preds, "predictions")
    if labels.shape != preds.shape:
        raise ValueError("labels and predictions differ in length")
    if w is None:
        # exact count / n, free of weight rounding
        return float(np.count_nonzero(labels == preds) / labels.shape[0])
    w = check_weights(w, labels.shape[0])
    return float(np.dot(w, labels == preds))


def weighted_auc(labels, scores, w=None):
    """Weighted area under the ROC curve with ties counted one half.

    Each (positive, negative) pair contributes with weight ``w_i * w_j``;
    the result is normalised by the product of the class weight totals.
    """
    labels = check_binary(labels, "labels")
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores differ in length")
    w = np.ones(labels.shape[0]) if w is None else check_weights(w, labels.shape[0])
    pos = labels == 1
    wp, wn = w[pos], w[~pos]
    denom = wp.sum() * wn.sum()
    if denom <= 0:
        raise ValueError("AUC requires positive weight on both classes")
    kernel = _pair_kernel(scores[pos], scores[~pos])
    return float(wp @ kernel @ wn / denom)


def batch_accuracy(labels, preds, counts):
    """Accuracy for many resamples at once.

    Parameters
    ----------
    labels : ndarray of shape (n,)
    preds : ndarray of shape (n, m)
    counts : ndarray of shape (B, n)
        Nonnegative multiplicities (or weights) per resample.

    Returns
    -------
    ndarray of shape (B, m)
    """
    correct = (np.asarray(preds) == np.asarray(labels)[:, None]).astype(float)
    counts = np.asarray(counts, dtype=float)
    return (counts @ correct) / counts.sum(axis=1, keepdims=True)


def batch_auc(labels, scores, counts):
    """AUC for many resamples at once; rows lacking a class give ``nan``."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    counts = np.asarray(counts, dtype=float)
    pos = labels == 1
    cp, cn = counts[:, pos], counts[:, ~pos]
    denom = cp.sum(axis=1) * cn.sum(axis=1)
    out = np.empty((counts.shape[0], scores.shape[1]))
    for j in range(scores.shape[1]):
        kernel = _pair_kernel(scores[pos, j], scores[~pos, j])
        out[:, j] = np.einsum("bi,ij,bj->b", cp, kernel, cn)
    with np.errstate(invalid="ignore", divide="ignore"):
        out /= denom[:, None]
    out[denom <= 0] = np.nan
    return out


def plugin_estimates(table, kind):
    """Uniform-weight performance of every model column in ``table``."""
    kind = table.check_kind(kind)
    uniform = np.ones((1, table.n))
    if kind is MeasureKind.ACCURACY:
        return batch_accuracy(table.labels, table.predictions, uniform)[0]
    return batch_auc(table.labels, table.predictions, uniform)[0]


def weighted_measure(kind, labels, preds, w=None):
    kind = MeasureKind.parse(kind)
    if kind is MeasureKind.ACCURACY:
        return weighted_accuracy(labels, preds, w)
    return weighted_auc(labels, preds, w)


def influence_scores(kind, labels, preds):
    """Per-observation influence scores that define the tilting direction.

    Accuracy uses the correctness indicators, whose mean is the accuracy.
    AUC uses leave-one-out jackknife pseudo-values
    ``n * auc - (n - 1) * auc_without_i``.
    """
    kind = MeasureKind.parse(kind)
    labels = check_binary(labels, "labels")
    if kind is MeasureKind.ACCURACY:
        preds = check_binary(preds, "predictions")
        if labels.shape != preds.shape:
            raise ValueError("labels and predictions differ in length")
        return (labels == preds).astype(float)

    scores = np.asarray(preds, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores differ in length")
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos < 2 or n_neg < 2:
        raise ValueError("AUC influence scores need at least 2 observations per class")
    n = labels.shape[0]
    kernel = _pair_kernel(scores[pos], scores[~pos])
    total = kernel.sum()
    auc = total / (n_pos * n_neg)
    loo = np.empty(n)
    loo[pos] = (total - kernel.sum(axis=1)) / ((n_pos - 1) * n_neg)
    loo[~pos] = (total - kernel.sum(axis=0)) / (n_pos * (n_neg - 1))
    return n * auc - (n - 1) * loo
