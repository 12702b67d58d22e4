"""Classical one-sided lower confidence bounds and the Sidak adjustment.

All bounds are one-sided at level ``alpha`` (critical value ``z_{1-alpha}``)
and clamped into ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .measures import check_binary


@dataclass(frozen=True)
class BinomialSummary:
    successes: int
    trials: int

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise ValueError(
                f"invalid binomial summary x={self.successes}, n={self.trials}"
            )

    @property
    def proportion(self):
        return self.successes / self.trials


@dataclass(frozen=True)
class AucSummary:
    auc: float
    n_pos: int
    n_neg: int
    variance: float = 0.0

    def __post_init__(self):
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("AUC summary needs at least one observation per class")
        if not 0.0 <= self.auc <= 1.0 or self.variance < 0:
            raise ValueError("AUC must lie in [0, 1] and variance must be nonnegative")


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _z(alpha):
    _check_alpha(alpha)
    return float(stats.norm.ppf(1.0 - alpha))


def _clamp(x):
    return float(min(1.0, max(0.0, x)))


def sidak_adjust(alpha, m):
    """Per-comparison level ``1 - (1 - alpha)**(1/m)``."""
    _check_alpha(alpha)
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if m == 1:
        return float(alpha)
    return 1.0 - (1.0 - alpha) ** (1.0 / m)


def wald_lower(summary, alpha=0.05):
    p = summary.proportion
    return _clamp(p - _z(alpha) * math.sqrt(p * (1 - p) / summary.trials))


def wilson_lower(summary, alpha=0.05):
    """Lower root of the Wilson score interval, no continuity correction."""
    z = _z(alpha)
    n, p = summary.trials, summary.proportion
    if summary.successes == 0:
        return 0.0
    centre = p + z * z / (2 * n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return _clamp((centre - half) / (1 + z * z / n))


def cp_lower(summary, alpha=0.05):
    """Clopper-Pearson exact lower bound, the ``alpha`` quantile of Beta(x, n-x+1)."""
    _check_alpha(alpha)
    x, n = summary.successes, summary.trials
    if x == 0:
        return 0.0
    if x == n:
        return alpha ** (1.0 / n)
    return _clamp(stats.beta.ppf(alpha, x, n - x + 1))


def delong_components(labels, scores):
    """AUC and its DeLong variance from structural components.

    Returns
    -------
    AucSummary
    """
    labels = check_binary(labels, "labels")
    scores = np.asarray(scores, dtype=float)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("DeLong components need both classes")
    diff = scores[pos][:, None] - scores[~pos][None, :]
    psi = (diff > 0) + 0.5 * (diff == 0)
    v10 = psi.mean(axis=1)
    v01 = psi.mean(axis=0)
    auc = float(psi.sum() / (n_pos * n_neg))
    s10 = v10.var(ddof=1) if n_pos > 1 else 0.0
    s01 = v01.var(ddof=1) if n_neg > 1 else 0.0
    return AucSummary(auc=auc, n_pos=n_pos, n_neg=n_neg, variance=float(s10 / n_pos + s01 / n_neg))


def delong_lower(summary, alpha=0.05):
    return _clamp(summary.auc - _z(alpha) * math.sqrt(summary.variance))


def hanley_mcneil_variance(auc, n_pos, n_neg):
    q1 = auc / (2 - auc)
    q2 = 2 * auc * auc / (1 + auc)
    var = (
        auc * (1 - auc) + (n_pos - 1) * (q1 - auc * auc) + (n_neg - 1) * (q2 - auc * auc)
    ) / (n_pos * n_neg)
    return max(var, 0.0)


def hm_lower(summary, alpha=0.05):
    """Hanley-McNeil lower bound; uses only the AUC value and class counts."""
    var = hanley_mcneil_variance(summary.auc, summary.n_pos, summary.n_neg)
    return _clamp(summary.auc - _z(alpha) * math.sqrt(var))
