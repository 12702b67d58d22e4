import numpy as np
import pytest

from mabt.measures import EvaluationTable
from mabt.multiplicity import (
    EcdfTransform,
    MaxEcdf,
    mabt_lower_bound,
    max_ecdf,
    model_ecdfs,
    simultaneous_bounds,
)
from mabt.resample import bootstrap_performance, draw_resamples
from mabt.tilting import bt_lower_bound

from conftest import noisy_predictions


def ensemble_of(table, kind="accuracy", B=2000, seed=0):
    return bootstrap_performance(table, kind, draw_resamples(table.n, B, seed=seed))


def test_ecdf_transform_with_ties():
    theta = np.array([[0.2], [0.4], [0.4], [0.8]])
    tr = EcdfTransform(np.sort(theta, axis=0), theta)
    np.testing.assert_allclose(tr.transform()[:, 0], [0.25, 0.75, 0.75, 1.0])
    assert tr.evaluate(0, 0.1) == 0.0
    assert tr.evaluate(0, 0.4) == 0.75


def test_rank_transform_is_permutation(rng):
    theta = rng.normal(size=(50, 3)).round(1)
    tr = EcdfTransform(np.sort(theta, axis=0), theta)
    u = tr.rank_transform()
    for j in range(3):
        np.testing.assert_allclose(np.sort(u[:, j]), np.arange(1, 51) / 50)
    distinct = rng.normal(size=(40, 2))
    tr = EcdfTransform(np.sort(distinct, axis=0), distinct)
    np.testing.assert_array_equal(tr.transform(), tr.rank_transform())


def test_max_ecdf_two_point_example():
    f = MaxEcdf.from_values([[0.5, 0.25], [0.75, 1.0]])
    np.testing.assert_array_equal(f.sorted_max, [0.5, 1.0])
    assert f(0.5) == 0.5 and f(0.99) == 0.5 and f(1.0) == 1.0


def test_single_column_and_duplicates(accuracy_table):
    ens = ensemble_of(accuracy_table)
    single = bootstrap_performance(
        EvaluationTable(accuracy_table.labels, accuracy_table.column(1)), "accuracy", ens.plan
    )
    dup = bootstrap_performance(
        EvaluationTable(accuracy_table.labels, np.column_stack([accuracy_table.column(1)] * 3)),
        "accuracy", ens.plan,
    )
    f1 = max_ecdf(model_ecdfs(single))
    f3 = max_ecdf(model_ecdfs(dup))
    np.testing.assert_array_equal(f1.sorted_max, f3.sorted_max)
    np.testing.assert_allclose(f1.sorted_max, np.arange(1, ens.B + 1) / ens.B)


@pytest.mark.parametrize("kind", ["accuracy", "auc"])
def test_single_model_reduces_to_bt(kind, accuracy_table, auc_table):
    table = accuracy_table if kind == "accuracy" else auc_table
    for j in range(table.m):
        one = EvaluationTable(table.labels, table.column(j))
        ens = ensemble_of(one, kind, seed=j)
        bt = bt_lower_bound(one, kind, 0, ens)
        mabt = mabt_lower_bound(one, kind, 0, ens)
        # equal up to the 1/B level resolution of the two calibrations
        lo = bt_lower_bound(one, kind, 0, ens, 0.05 + 1 / ens.B).lower_bound
        hi = bt_lower_bound(one, kind, 0, ens, 0.05 - 1 / ens.B).lower_bound
        assert hi - 1e-9 <= mabt.lower_bound <= lo + 1e-9
        assert abs(mabt.lower_bound - bt.lower_bound) <= 0.01


def test_duplicated_models_leave_bound_unchanged(accuracy_table):
    y, col = accuracy_table.labels, accuracy_table.column(0)
    base = EvaluationTable(y, np.column_stack([col, accuracy_table.column(1)]))
    dup = EvaluationTable(y, np.column_stack([col, accuracy_table.column(1), col, col, col]))
    plan = draw_resamples(base.n, 2000, seed=4)
    a = mabt_lower_bound(base, "accuracy", 0, bootstrap_performance(base, "accuracy", plan))
    b = mabt_lower_bound(dup, "accuracy", 0, bootstrap_performance(dup, "accuracy", plan))
    assert a.lower_bound == b.lower_bound
    assert a.tau == b.tau


def test_identical_columns_equal_single_model(accuracy_table):
    y, col = accuracy_table.labels, accuracy_table.column(2)
    plan = draw_resamples(accuracy_table.n, 2000, seed=5)
    five = EvaluationTable(y, np.column_stack([col] * 5))
    one = EvaluationTable(y, col)
    a = mabt_lower_bound(five, "accuracy", 0, bootstrap_performance(five, "accuracy", plan))
    b = mabt_lower_bound(one, "accuracy", 0, bootstrap_performance(one, "accuracy", plan))
    assert a.lower_bound == b.lower_bound


def test_permutation_invariance(accuracy_table):
    plan = draw_resamples(accuracy_table.n, 2000, seed=6)
    perm = [2, 0, 3, 1]
    shuffled = EvaluationTable(
        accuracy_table.labels, accuracy_table.predictions[:, perm],
        tuple(accuracy_table.model_ids[k] for k in perm),
    )
    a = mabt_lower_bound(accuracy_table, "accuracy", "b", bootstrap_performance(accuracy_table, "accuracy", plan))
    b = mabt_lower_bound(shuffled, "accuracy", "b", bootstrap_performance(shuffled, "accuracy", plan))
    assert a.lower_bound == b.lower_bound


def test_adding_competitor_never_raises_bound(rng):
    y = rng.integers(0, 2, 50)
    cols = [noisy_predictions(rng, y, 0.8) for _ in range(4)]
    plan = draw_resamples(50, 2000, seed=9)
    prev = None
    for m in range(2, 5):
        t = EvaluationTable(y, np.column_stack(cols[:m]))
        b = mabt_lower_bound(t, "accuracy", 0, bootstrap_performance(t, "accuracy", plan)).lower_bound
        if prev is not None:
            assert b <= prev + 1e-12
        prev = b


def test_mabt_not_above_bt_and_monotone_in_alpha(accuracy_table, auc_table):
    for table, kind in ((accuracy_table, "accuracy"), (auc_table, "auc")):
        ens = ensemble_of(table, kind, seed=1)
        for j in range(table.m):
            m05 = mabt_lower_bound(table, kind, j, ens, 0.05)
            m10 = mabt_lower_bound(table, kind, j, ens, 0.10)
            bt = bt_lower_bound(table, kind, j, ens, 0.05)
            assert m05.lower_bound <= bt.lower_bound + 1e-12
            assert m10.lower_bound >= m05.lower_bound
            assert m05.lower_bound <= m05.estimate


def test_simultaneous_bounds(accuracy_table):
    ens = ensemble_of(accuracy_table, seed=2)
    res = simultaneous_bounds(accuracy_table, "accuracy", ens, 0.05)
    assert len(res) == accuracy_table.m
    for j, r in enumerate(res):
        assert r.lower_bound == mabt_lower_bound(accuracy_table, "accuracy", j, ens).lower_bound
        assert r.lower_bound <= r.estimate
    threaded = simultaneous_bounds(accuracy_table, "accuracy", ens, 0.05, n_jobs=4)
    assert [r.lower_bound for r in threaded] == [r.lower_bound for r in res]
    one = EvaluationTable(accuracy_table.labels, accuracy_table.column(0))
    ens1 = ensemble_of(one)
    assert simultaneous_bounds(one, "accuracy", ens1)[0].lower_bound == mabt_lower_bound(one, "accuracy", 0, ens1).lower_bound


def test_degenerate_model_uses_sidak_fallback(rng):
    y = rng.integers(0, 2, 30)
    t = EvaluationTable(y, np.column_stack([y, noisy_predictions(rng, y, 0.7)]))
    res = mabt_lower_bound(t, "accuracy", 0, ensemble_of(t))
    assert res.fallback_used
    level = 1 - 0.95 ** 0.5
    assert res.lower_bound == pytest.approx(level ** (1 / 30))
