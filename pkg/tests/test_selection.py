import math

import numpy as np
import pytest

from mabt.measures import MeasureKind
from mabt.selection import (
    SelectionRule,
    ValidationScores,
    cv_performance,
    final_select,
    holdout_performance,
    kfold_indices,
    preselect,
)


def test_fold_sizes_for_data_example():
    folds = kfold_indices(523, 10, seed=1)
    assert sorted(len(f) for f in folds) == [52] * 7 + [53] * 3


def test_folds_partition():
    for n, k in ((10, 10), (37, 5), (100, 10)):
        folds = kfold_indices(n, k, seed=3)
        joined = np.concatenate(folds)
        assert sorted(joined.tolist()) == list(range(n))
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1
    assert all(len(f) == 1 for f in kfold_indices(10, 10))


def test_folds_deterministic_and_validated():
    a, b = kfold_indices(50, 10, seed=7), kfold_indices(50, 10, seed=7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(ValueError):
        kfold_indices(5, 10)
    with pytest.raises(ValueError):
        kfold_indices(50, 1)


class Constant:
    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return np.full(len(X), self.label)


def constant_trainer(X, y, label):
    return Constant(label)


class Recorder:
    """Trainer predicting the training-set majority; remembers fold scores."""

    def __call__(self, X, y, shift):
        label = int(np.mean(y) + shift >= 0.5)
        return Constant(label)


def test_cv_constant_predictor_balanced():
    y = np.tile([0, 1], 50)
    X = np.zeros((100, 1))
    sc = cv_performance(X, y, constant_trainer, [0, 1], "accuracy", k=10, seed=0)
    assert sc.source == "cv10"
    np.testing.assert_allclose(sc.eta, [0.5, 0.5], atol=0.11)
    assert sc.eta.mean() == pytest.approx(0.5)


def test_cv_mean_of_fold_scores(rng):
    X = rng.normal(size=(60, 2))
    y = rng.integers(0, 2, 60)
    sc = cv_performance(X, y, Recorder(), [-0.3, 0.0, 0.3], "accuracy", k=6, seed=4)
    folds = kfold_indices(60, 6, seed=4)
    for j, shift in enumerate([-0.3, 0.0, 0.3]):
        scores = []
        for test in folds:
            train = np.setdiff1d(np.arange(60), test)
            label = int(np.mean(y[train]) + shift >= 0.5)
            scores.append(np.mean(y[test] == label))
        assert sc.eta[j] == pytest.approx(np.mean(scores))
        assert sc.se[j] == pytest.approx(np.std(scores, ddof=1) / math.sqrt(6))


def test_cv_trainer_failure_reports_fold():
    calls = []

    def trainer(X, y, p):
        calls.append(1)
        if len(calls) > 3:
            raise ArithmeticError("boom")
        return Constant(0)

    with pytest.raises(RuntimeError, match="fold 3"):
        cv_performance(np.zeros((20, 1)), np.tile([0, 1], 10), trainer, [0], "accuracy", k=5)
    with pytest.raises(ValueError):
        cv_performance(np.zeros((20, 1)), np.tile([0, 1], 10), constant_trainer, [0], "accuracy", k=1)


def test_holdout_scores():
    y = np.array([1, 1, 1, 0])
    sc = holdout_performance(np.zeros((4, 1)), y, np.zeros((4, 1)), y, constant_trainer, [0, 1], "accuracy")
    np.testing.assert_allclose(sc.eta, [0.25, 0.75])
    assert sc.se is None


def test_preselect_rules():
    sc = ValidationScores([0.9, 0.89, 0.7], se=[0.02, 0.01, 0.01], source="cv10")
    assert preselect(sc, "within-1-se").preselected == (0, 1)
    assert preselect(ValidationScores([0.3, 0.8, 0.5]), "single-best").preselected == (1,)
    eta = np.linspace(0.5, 0.9, 100)
    out = preselect(ValidationScores(eta), "top-fraction=0.1")
    assert out.m == 10
    assert out.preselected == tuple(range(99, 89, -1))
    assert preselect(ValidationScores(np.arange(15.0)), "top-fraction=0.1").m == 2
    with pytest.raises(ValueError):
        preselect(ValidationScores([0.1, 0.2]), "within-1-se")


def test_top_fraction_ties_by_index():
    out = preselect(ValidationScores([0.8, 0.9, 0.8, 0.8, 0.1]), SelectionRule("top-fraction", 0.6))
    assert out.preselected == (1, 0, 2)


def test_preselect_ignores_worse_candidates(rng):
    eta = rng.uniform(0.6, 0.9, 30)
    se = rng.uniform(0.01, 0.03, 30)
    base = ValidationScores(eta, se, "cv10")
    more = ValidationScores(np.r_[eta, 0.1], np.r_[se, 0.02], "cv10")
    for rule in ("single-best", "within-1-se"):
        assert preselect(base, rule).preselected == preselect(more, rule).preselected
    rule = SelectionRule("top-fraction", 0.1)
    if math.ceil(0.1 * 31) == math.ceil(0.1 * 30):
        assert preselect(base, rule).preselected == preselect(more, rule).preselected


def test_rule_parsing():
    assert str(SelectionRule.parse("top-fraction=0.25")) == "top-fraction=0.25"
    assert SelectionRule.parse("within-1-se").name == "within-1-se"
    with pytest.raises(ValueError):
        SelectionRule.parse("best-three")
    with pytest.raises(ValueError):
        SelectionRule.parse("top-fraction=2")


def test_final_select():
    assert final_select([0.8, 0.9, 0.85]) == 1
    assert final_select([0.7, 0.7, 0.7]) == 0
    assert final_select([0.4]) == 0
    est = np.array([0.61, 0.72, 0.55, 0.72])
    assert final_select(np.exp(est) * 3 - 1) == final_select(est) == 1


def test_validation_scores_invariants():
    with pytest.raises(ValueError):
        ValidationScores([0.5], se=[0.1], source="holdout")
    with pytest.raises(ValueError):
        ValidationScores([0.5], source="cv10")
    with pytest.raises(ValueError):
        ValidationScores([])
