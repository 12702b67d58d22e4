"""Multiplicity-adjusted bootstrap tilting (maxT over rank-transformed estimates).

Every model's bootstrap estimates are mapped through that model's own ECDF,
the row-wise maximum across models is taken, and the ECDF of those maxima
replaces the identity as the calibration target of the tilting search.

Accuracy estimates live on a lattice, so the plain ECDF transform has large
atoms.  The calibration therefore uses ranks with ties broken by resample
index (rows are exchangeable, so this is a random tie-break shared by all
models); the transformed values are then exactly uniform and a single model
reduces to ordinary bootstrap tilting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .baselines import sidak_adjust
from .exceptions import CalibrationFailure, DegenerateTilt
from .measures import MeasureKind
from .tilting import (
    TIE_TOL,
    CalibrationResult,
    TiltingFamily,
    _check_alpha,
    calibrate,
    fallback_bound,
    tilt_weights,
    tilted_statistic,
)


@dataclass(frozen=True)
class EcdfTransform:
    """Per-model ECDFs of the bootstrap estimates (columns sorted ascending)."""

    sorted_theta: np.ndarray
    theta_star: np.ndarray

    @classmethod
    def from_ensemble(cls, ensemble):
        theta = np.asarray(ensemble.theta_star, dtype=float)
        return cls(sorted_theta=np.sort(theta, axis=0), theta_star=theta)

    @property
    def B(self):
        return self.sorted_theta.shape[0]

    def evaluate(self, j, x):
        """``F_j(x) = #{b : theta*_bj <= x} / B``."""
        col = self.sorted_theta[:, j]
        return np.searchsorted(col, np.asarray(x) + TIE_TOL, side="right") / self.B

    def transform(self):
        """The transformed estimates ``u_bj = F_j(theta*_bj)``, shape ``(B, m)``."""
        return np.column_stack(
            [self.evaluate(j, self.theta_star[:, j]) for j in range(self.sorted_theta.shape[1])]
        )

    def rank_transform(self):
        """Like :meth:`transform`, with ties broken by resample index.

        Each column becomes a permutation of ``1/B, 2/B, ..., 1``.
        """
        B = self.B
        u = np.empty(self.theta_star.shape)
        for j in range(u.shape[1]):
            order = np.argsort(self.theta_star[:, j], kind="stable")
            u[order, j] = np.arange(1, B + 1) / B
        return u


@dataclass(frozen=True)
class MaxEcdf:
    """ECDF of the row-wise maxima of the transformed estimates."""

    sorted_max: np.ndarray

    @classmethod
    def from_transform(cls, transform, break_ties=True):
        u = transform.rank_transform() if break_ties else transform.transform()
        return cls.from_values(u)

    @classmethod
    def from_values(cls, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if u.shape[1] < 1:
            raise ValueError("at least one model is required")
        return cls(np.sort(u.max(axis=1)))

    @property
    def B(self):
        return self.sorted_max.shape[0]

    def __call__(self, x):
        return np.searchsorted(self.sorted_max, np.asarray(x) + TIE_TOL, side="right") / self.B


def model_ecdfs(ensemble):
    return EcdfTransform.from_ensemble(ensemble)


def max_ecdf(transform, break_ties=True):
    return MaxEcdf.from_transform(transform, break_ties=break_ties)


def mabt_lower_bound(table, kind, selected, ensemble, alpha=0.05, max_cdf=None, centered=False):
    """MABT lower confidence bound for one model among the ``m`` evaluated.

    Finds the largest ``tau < 0`` with ``F_max(F_tau(theta_hat)) >= 1 - alpha``,
    where ``F_tau(theta_hat) = 1 - P_tau(theta* >= theta_hat)`` is the
    importance-reweighted probability of falling below the observed
    estimate, and evaluates the measure under the tilted weights.

    Parameters
    ----------
    table : EvaluationTable
    kind : MeasureKind or str
    selected : str or int
        Model for which the bound is computed.
    ensemble : BootstrapEnsemble
        Bootstrap estimates for all ``m`` models in ``table``.
    alpha : float
        Family-wise error level, in ``(0, 0.5)``.
    max_cdf : MaxEcdf, optional
        Precomputed maximum ECDF; shared across models by
        :func:`simultaneous_bounds`.

    Returns
    -------
    CalibrationResult
    """
    _check_alpha(alpha)
    kind = MeasureKind.parse(kind)
    j = table.index(selected)
    if ensemble.m != table.m:
        raise ValueError("ensemble and table disagree on the number of models")
    if max_cdf is None:
        max_cdf = max_ecdf(model_ecdfs(ensemble))
    estimate = float(ensemble.plugin[j])
    try:
        family = TiltingFamily.from_table(table, kind, j, centered=centered)
    except DegenerateTilt:
        level = sidak_adjust(alpha, table.m)
        return CalibrationResult(
            method="mabt", model=table.model_ids[j], alpha=alpha, estimate=estimate,
            lower_bound=min(fallback_bound(table, kind, j, level), estimate),
            tau=None, achieved_level=None, iterations=0, fallback_used=True,
            diagnostics={"reason": "degenerate tilt", "fallback_alpha": level},
        )

    counts = ensemble.plan.counts
    upper = ensemble.theta_star[:, j] >= estimate - TIE_TOL
    cz = counts @ family.z
    excess = [0.0]
    cache = {}

    def tilted_cdf(tau):
        # complement form: the upper tail carries small, well-behaved weights
        log_w = tau * cz + family.n * (math.log(family.n) - logsumexp(tau * family.z))
        value = 1.0 - float(np.exp(log_w[upper]).sum() / ensemble.B)
        if value < 0.0:
            excess[0] = max(excess[0], -value)
        return min(1.0, max(0.0, value))

    def adjusted(tau):
        if tau not in cache:
            cache[tau] = float(max_cdf(tilted_cdf(tau)))
        return cache[tau]

    tau, iterations, bracket = calibrate(lambda t: adjusted(t) >= 1.0 - alpha, adjusted, ensemble.B)
    bound = tilted_statistic(table, kind, j, tilt_weights(family, tau))
    return CalibrationResult(
        method="mabt", model=table.model_ids[j], alpha=alpha, estimate=estimate,
        lower_bound=min(bound, estimate), tau=tau, achieved_level=1.0 - adjusted(tau),
        iterations=iterations, fallback_used=False,
        diagnostics={"bracket": bracket, "ecdf_excess": excess[0], "m": table.m},
    )


def simultaneous_bounds(table, kind, ensemble, alpha=0.05, n_jobs=1, centered=False):
    """MABT bounds for every model, sharing one ensemble and one maximum ECDF.

    A model whose calibration fails gets its :class:`CalibrationFailure`
    in place of a result.
    """
    _check_alpha(alpha)
    max_cdf = max_ecdf(model_ecdfs(ensemble))

    def one(j):
        try:
            return mabt_lower_bound(table, kind, j, ensemble, alpha, max_cdf=max_cdf, centered=centered)
        except CalibrationFailure as exc:
            return exc

    if n_jobs > 1 and table.m > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(one, range(table.m)))
    return [one(j) for j in range(table.m)]
