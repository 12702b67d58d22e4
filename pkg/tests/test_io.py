import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mabt.io import InputError, format_predictions, format_rows, parse_predictions
from mabt.measures import EvaluationTable


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 30), st.integers(1, 4), st.integers(0, 2**32 - 1), st.sampled_from(["accuracy", "auc"]))
def test_round_trip(n, m, seed, kind):
    rng = np.random.default_rng(seed)
    y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
    preds = rng.integers(0, 2, (n, m)) if kind == "accuracy" else rng.normal(size=(n, m)) * 10.0 ** rng.integers(-8, 8)
    table = EvaluationTable(y, preds, tuple(f"model_{j}" for j in range(m)))
    text = format_predictions(table, kind)
    again = parse_predictions(text, kind)
    np.testing.assert_array_equal(again.labels, table.labels)
    np.testing.assert_array_equal(again.predictions, table.predictions)
    assert again.model_ids == table.model_ids
    assert format_predictions(again, kind) == text


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty"),
        ("x,a\n1,0\n0,1\n", "'y'"),
        ("y,a\n2,1\n0,1\n", "row 2, column 'y'"),
        ("y,a\n1,1\n0,0.5\n", "row 3, column 'a'"),
        ("y,a\n1,1\n0\n", "row 3: expected 2"),
        ("y,a,a\n1,1,1\n0,0,0\n", "distinct"),
        ("y,a\n1,abc\n0,1\n", "not a number"),
        ("y,a\n1,1\n", "at least 2"),
    ],
)
def test_malformed_accuracy_input(text, fragment):
    with pytest.raises(InputError, match=fragment.replace("(", r"\(")):
        parse_predictions(text, "accuracy")


def test_auc_requires_both_classes():
    with pytest.raises(InputError):
        parse_predictions("y,s\n1,0.2\n1,0.4\n", "auc")
    t = parse_predictions("y,s\n1,0.2\n0,-1e-3\n", "auc")
    assert t.predictions[1, 0] == -1e-3


def test_format_rows():
    text = format_rows(["a", "b", "c"], [{"a": True, "b": 0.1, "c": float("nan")}])
    assert text == "a,b,c\n1,0.1,nan\n"
