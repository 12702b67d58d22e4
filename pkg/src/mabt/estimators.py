"""Estimator-style front end to the bound computations.

``X`` is the ``(n, m)`` matrix of evaluation-set predictions (one column
per preselected model, in preselection order) and ``y`` the true labels,
so the bounds slot into code written against the scikit-learn API.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y

from .bounds import MethodSpec, check_method, compute_bound
from .measures import EvaluationTable, MeasureKind, plugin_estimates
from .multiplicity import simultaneous_bounds
from .resample import DEFAULT_B, bootstrap_performance, draw_resamples
from .selection import final_select


class PerformanceLowerBound(BaseEstimator):
    """Lower confidence bound for the performance of the best evaluated model.

    Parameters
    ----------
    method : str
        One of ``mabt``, ``bt``, ``wald``, ``wilson``, ``cp``, ``delong``,
        ``hm``, optionally suffixed ``+sidak``.
    measure : {'accuracy', 'auc'}
    alpha : float
        One-sided error level in ``(0, 0.5)``.
    n_resamples : int or None
        Bootstrap size; ``None`` picks 10000 for accuracy and 2000 for AUC.
    random_state : int
        Seed of the resampling plan.
    n_jobs : int
        Threads used for resampling; results do not depend on it.

    Attributes
    ----------
    estimates_ : ndarray of shape (m,)
        Plug-in performance of every column.
    selected_ : int
        Column with the best estimate (earliest column on ties).
    lower_bound_ : float
    report_ : BoundReport
    """

    def __init__(self, method="mabt", measure="accuracy", alpha=0.05, n_resamples=None,
                 random_state=0, n_jobs=1):
        self.method = method
        self.measure = measure
        self.alpha = alpha
        self.n_resamples = n_resamples
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _table(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=2)
        return EvaluationTable(y, X)

    def fit(self, X, y):
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        kind = MeasureKind.parse(self.measure)
        spec = MethodSpec.parse(self.method)
        table = self._table(X, y)
        table.check_kind(kind)
        check_method(spec, kind, table.m)
        self.table_ = table
        self.estimates_ = plugin_estimates(table, kind)
        self.selected_ = final_select(self.estimates_)
        self.ensemble_ = None
        if spec.name in ("mabt", "bt"):
            B = self.n_resamples or DEFAULT_B[kind]
            plan = draw_resamples(table.n, B, self.random_state, self.n_jobs)
            self.ensemble_ = bootstrap_performance(table, kind, plan, self.n_jobs)
        self.report_ = compute_bound(spec, table, kind, self.selected_, self.alpha, self.ensemble_)
        self.lower_bound_ = self.report_.lower_bound
        return self

    def simultaneous_bounds(self):
        """MABT bounds for every column (only for ``method='mabt'``)."""
        check_is_fitted(self, "report_")
        if MethodSpec.parse(self.method).name != "mabt":
            raise ValueError("simultaneous bounds are defined for the mabt method")
        results = simultaneous_bounds(self.table_, self.measure, self.ensemble_, self.alpha, self.n_jobs)
        return np.array([getattr(r, "lower_bound", np.nan) for r in results])
