"""Validation-stage performance estimation and model preselection rules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import MeasureKind, weighted_measure


@dataclass(frozen=True)
class ValidationScores:
    """Validation performance per candidate; ``se`` only for cross-validation."""

    eta: np.ndarray
    se: np.ndarray | None = None
    source: str = "holdout"

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if eta.ndim != 1 or eta.size < 1:
            raise ValueError("need at least one validation score")
        if self.source not in ("holdout", "cv10"):
            raise ValueError(f"unknown validation source {self.source!r}")
        if (self.se is None) != (self.source == "holdout"):
            raise ValueError("standard errors are present exactly for cross-validation")
        object.__setattr__(self, "eta", eta)
        if self.se is not None:
            object.__setattr__(self, "se", np.asarray(self.se, dtype=float))

    @property
    def r(self):
        return self.eta.size


@dataclass(frozen=True)
class SelectionRule:
    """``single-best``, ``top-fraction=F`` or ``within-1-se``."""

    name: str
    fraction: float | None = None

    def __post_init__(self):
        if self.name not in ("single-best", "top-fraction", "within-1-se"):
            raise ValueError(f"unknown selection rule {self.name!r}")
        if self.name == "top-fraction" and not (self.fraction and 0 < self.fraction <= 1):
            raise ValueError("top-fraction needs a fraction in (0, 1]")

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        text = str(text).strip().lower()
        if text.startswith("top-fraction"):
            _, _, value = text.partition("=")
            try:
                return cls("top-fraction", float(value or 0.1))
            except ValueError:
                raise ValueError(f"bad fraction in rule {text!r}") from None
        return cls(text)

    def __str__(self):
        if self.name == "top-fraction":
            return f"top-fraction={self.fraction:g}"
        return self.name


SINGLE_BEST = SelectionRule("single-best")


@dataclass(frozen=True)
class SelectionOutcome:
    preselected: tuple
    rule: SelectionRule
    final: int | None = None

    @property
    def m(self):
        return len(self.preselected)


def kfold_indices(n, k=10, seed=0):
    """Random partition of ``range(n)`` into ``k`` folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError("cross-validation needs k >= 2")
    if k > n:
        raise ValueError(f"cannot split {n} observations into {k} folds")
    perm = np.random.default_rng(np.random.SeedSequence([int(seed), n, k])).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def _predictions(model, X, kind):
    if kind is MeasureKind.ACCURACY:
        return model.predict(X) if hasattr(model, "predict") else model(X)
    return model.decision_function(X) if hasattr(model, "decision_function") else model(X)


def _fit_all(trainer, X, y, params):
    # trainers exposing fit_grid reuse work across the grid (warm starts)
    if hasattr(trainer, "fit_grid"):
        return trainer.fit_grid(X, y, params)
    return [trainer(X, y, p) for p in params]


def _score(kind, y, pred):
    if kind is MeasureKind.AUC and (y.min() == y.max()):
        return math.nan
    return weighted_measure(kind, y, pred)


def holdout_performance(X_train, y_train, X_val, y_val, trainer, params, kind):
    """Train every candidate on the training part, score it on the validation part."""
    kind = MeasureKind.parse(kind)
    models = _fit_all(trainer, X_train, y_train, params)
    eta = [_score(kind, y_val, _predictions(mod, X_val, kind)) for mod in models]
    return ValidationScores(eta=np.array(eta), source="holdout")


def cv_performance(X, y, trainer, params, kind, k=10, seed=0):
    """k-fold cross-validated performance of every candidate.

    ``trainer(X, y, param)`` returns a fitted model (an object with
    ``predict``/``decision_function`` or a plain callable); a trainer with a
    ``fit_grid(X, y, params)`` method is used for the whole grid at once.

    Returns
    -------
    ValidationScores
        Mean over folds and the fold standard deviation divided by ``sqrt(k)``.
    """
    kind = MeasureKind.parse(kind)
    X, y = np.asarray(X), np.asarray(y)
    folds = kfold_indices(len(y), k, seed)
    fold_scores = np.empty((k, len(params)))
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(y)), test, assume_unique=True)
        try:
            models = _fit_all(trainer, X[train], y[train], params)
        except Exception as exc:
            raise RuntimeError(f"trainer failed on fold {f}: {exc}") from exc
        fold_scores[f] = [_score(kind, y[test], _predictions(mod, X[test], kind)) for mod in models]
    valid = ~np.isnan(fold_scores)
    counts = valid.sum(axis=0)
    eta = np.nanmean(fold_scores, axis=0)
    se = np.where(counts > 1, np.nanstd(fold_scores, axis=0, ddof=1), 0.0) / np.sqrt(np.maximum(counts, 1))
    return ValidationScores(eta=eta, se=se, source="cv10")


def _ranking(eta):
    # descending performance, ties by candidate index
    return np.lexsort((np.arange(eta.size), -eta))


def preselect(scores, rule):
    """Choose the candidates carried forward to evaluation.

    Returns
    -------
    SelectionOutcome
        ``preselected`` is ordered by validation rank (best first).
    """
    rule = SelectionRule.parse(rule)
    order = _ranking(scores.eta)
    best = order[0]
    if rule.name == "single-best":
        chosen = order[:1]
    elif rule.name == "top-fraction":
        chosen = order[: math.ceil(rule.fraction * scores.r - 1e-9)]
    else:
        if scores.se is None:
            raise ValueError("within-1-se needs cross-validation standard errors")
        threshold = scores.eta[best] - scores.se[best]
        chosen = [j for j in order if scores.eta[j] >= threshold - 1e-12]
    return SelectionOutcome(preselected=tuple(int(j) for j in chosen), rule=rule)


def final_select(estimates):
    """Position of the best evaluation estimate; ties go to the earlier position.

    Positions follow preselection rank, so ties resolve to the model with the
    better validation performance.
    """
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size < 1:
        raise ValueError("no estimates to select from")
    return int(np.argmax(estimates))
