"""Exponential tilting of the empirical distribution and bootstrap-tilting bounds.

The tilted distribution puts mass ``p_i(tau) ~ exp(tau * z_i)`` on
observation ``i``.  Probabilities under it are estimated from ordinary
uniform resamples by importance reweighting; the weights are carried in
log space throughout because a product of ``n`` likelihood ratios
overflows quickly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .baselines import AucSummary, BinomialSummary, cp_lower, hanley_mcneil_variance, hm_lower
from .exceptions import CalibrationFailure, DegenerateTilt
from .measures import MeasureKind, check_weights, influence_scores, weighted_measure

TIE_TOL = 1e-12
TAU_START = -1.0
TAU_CAP = 50.0
TAU_TOL = 1e-6


@dataclass(frozen=True)
class TiltingFamily:
    """One-parameter exponential family over the ``n`` observed points.

    Shifting ``z`` leaves the normalised weights unchanged, so ``centered``
    only affects the raw exponents.
    """

    z: np.ndarray
    centered: bool = False

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 1 or z.shape[0] < 2:
            raise ValueError("influence scores must be a 1-d sequence of length >= 2")
        if not np.all(np.isfinite(z)):
            raise ValueError("influence scores must be finite")
        if np.ptp(z) <= 0:
            raise DegenerateTilt("constant influence scores; the empirical distribution cannot be tilted")
        if self.centered:
            z = z - z.mean()
        object.__setattr__(self, "z", z)

    @classmethod
    def from_table(cls, table, kind, model, centered=False):
        return cls(influence_scores(kind, table.labels, table.column(model)), centered=centered)

    @property
    def n(self):
        return self.z.shape[0]

    def log_weights(self, tau):
        a = tau * self.z
        return a - logsumexp(a)


@dataclass
class CalibrationResult:
    """Outcome of a tilting calibration.

    ``achieved_level`` is the estimated error probability at ``tau``; when no
    fallback was needed it does not exceed the nominal level.
    """

    method: str
    model: str
    alpha: float
    estimate: float
    lower_bound: float
    tau: float | None
    achieved_level: float | None
    iterations: int
    fallback_used: bool
    diagnostics: dict = field(default_factory=dict)


def tilt_weights(family, tau):
    """Normalised tilted sampling weights ``p(tau)``."""
    if not math.isfinite(tau):
        raise ValueError("tau must be finite")
    if not isinstance(family, TiltingFamily):
        family = TiltingFamily(family)
    return np.exp(family.log_weights(tau))


def log_importance_weight(counts_b, p, n):
    """Log relative likelihood ``sum_i c_i log(n p_i)`` of one resample."""
    counts_b = np.asarray(counts_b)
    p = np.asarray(p, dtype=float)
    if counts_b.sum() != n:
        raise ValueError("resample counts must sum to n")
    used = counts_b > 0
    if np.any(p[used] <= 0):
        return -math.inf
    return float(np.sum(counts_b[used] * np.log(n * p[used])))


def log_importance_weights(counts, family, tau):
    """Vectorised :func:`log_importance_weight` for a ``(B, n)`` count table."""
    n = family.n
    return tau * (counts @ family.z) + n * (math.log(n) - logsumexp(tau * family.z))


def tilted_ecdf(theta_star, log_w, x):
    """Importance-sampling estimate of the tilted CDF at ``x``.

    ``(1/B) * sum_b exp(log_w[b]) * [theta_star[b] <= x]``.  Not clamped: the
    estimate may exceed 1 slightly for extreme tilts.
    """
    theta_star = np.asarray(theta_star, dtype=float)
    log_w = np.asarray(log_w, dtype=float)
    below = theta_star <= x + TIE_TOL
    return float(np.exp(log_w[below]).sum() / theta_star.shape[0])


def tilted_statistic(table, kind, model, p):
    """The performance measure of ``model`` under sampling weights ``p``."""
    p = check_weights(p, table.n)
    return weighted_measure(kind, table.labels, table.column(model), p)


def calibrate(accept, level, B, tau_start=TAU_START, cap=TAU_CAP, tol=TAU_TOL):
    """Largest ``tau <= 0`` with ``accept(tau)`` true, by bracketed bisection.

    ``accept`` is assumed to switch from false (near 0) to true (very
    negative) once, up to Monte Carlo noise.  ``level`` supplies the
    diagnostic value tracked for the secondary stopping rule.

    Returns
    -------
    tau, iterations, bracket
    """
    if accept(0.0):
        return 0.0, 0, (0.0, 0.0)
    hi, lo, iterations = 0.0, tau_start, 0
    while not accept(lo):
        iterations += 1
        hi, lo = lo, 2.0 * lo
        if abs(lo) > cap:
            raise CalibrationFailure(
                f"no tilting parameter in [-{cap}, 0] reaches the target level",
                bracket=(hi, 0.0),
                level=level(hi),
            )
    min_change = 1.0 / (10.0 * B)
    while hi - lo > tol:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if accept(mid):
            lo = mid
        else:
            hi = mid
        if abs(level(lo) - level(hi)) < min_change:
            break
    return lo, iterations, (lo, hi)


def _check_alpha(alpha):
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")


def fallback_bound(table, kind, model, alpha):
    """Conservative bound for data that cannot be tilted.

    Clopper-Pearson for accuracy; Hanley-McNeil for AUC when its variance is
    positive, otherwise the trivial bound 0.
    """
    kind = MeasureKind.parse(kind)
    column = table.column(model)
    if kind is MeasureKind.ACCURACY:
        correct = int(np.sum(column == table.labels))
        return cp_lower(BinomialSummary(correct, table.n), alpha)
    pos = table.labels == 1
    auc = weighted_measure(kind, table.labels, column)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if hanley_mcneil_variance(auc, n_pos, n_neg) > 0:
        return hm_lower(AucSummary(auc=auc, n_pos=n_pos, n_neg=n_neg), alpha)
    return 0.0


def bt_lower_bound(table, kind, model, ensemble, alpha=0.05, centered=False):
    """Bootstrap-tilting lower confidence bound for a single model.

    Finds the largest ``tau < 0`` at which the reweighted probability of a
    bootstrap estimate at least as large as the observed one is ``<= alpha``
    and returns the measure under the corresponding tilted weights.

    Returns
    -------
    CalibrationResult
    """
    _check_alpha(alpha)
    kind = MeasureKind.parse(kind)
    j = table.index(model)
    estimate = float(ensemble.plugin[j])
    try:
        family = TiltingFamily.from_table(table, kind, j, centered=centered)
    except DegenerateTilt:
        return CalibrationResult(
            method="bt", model=table.model_ids[j], alpha=alpha, estimate=estimate,
            lower_bound=min(fallback_bound(table, kind, j, alpha), estimate),
            tau=None, achieved_level=None, iterations=0, fallback_used=True,
            diagnostics={"reason": "degenerate tilt"},
        )
    counts = ensemble.plan.counts
    upper = ensemble.theta_star[:, j] >= estimate - TIE_TOL
    cz = counts @ family.z
    cache = {}

    def level(tau):
        if tau not in cache:
            log_w = tau * cz + family.n * (math.log(family.n) - logsumexp(tau * family.z))
            cache[tau] = float(np.exp(log_w[upper]).sum() / ensemble.B)
        return cache[tau]

    tau, iterations, bracket = calibrate(lambda t: level(t) <= alpha, level, ensemble.B)
    bound = tilted_statistic(table, kind, j, tilt_weights(family, tau))
    return CalibrationResult(
        method="bt", model=table.model_ids[j], alpha=alpha, estimate=estimate,
        lower_bound=min(bound, estimate), tau=tau, achieved_level=level(tau),
        iterations=iterations, fallback_used=False, diagnostics={"bracket": bracket},
    )
