import numpy as np
import pytest

from mabt.measures import EvaluationTable


def noisy_predictions(rng, labels, accuracy):
    """0/1 predictions that agree with ``labels`` with probability ``accuracy``."""
    flip = rng.random(labels.shape[0]) >= accuracy
    return np.where(flip, 1 - labels, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def accuracy_table(rng):
    y = rng.integers(0, 2, 60)
    cols = [noisy_predictions(rng, y, q) for q in (0.75, 0.8, 0.7, 0.78)]
    return EvaluationTable(y, np.column_stack(cols), ("a", "b", "c", "d"))


@pytest.fixture
def auc_table(rng):
    y = np.repeat([0, 1], 30)
    scores = np.column_stack([y + rng.normal(0, s, y.size) for s in (0.9, 1.1, 1.3)])
    return EvaluationTable(y, scores, ("s1", "s2", "s3"))
