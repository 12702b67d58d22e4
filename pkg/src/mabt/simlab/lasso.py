"""L1-penalised logistic regression by coordinate descent.

Minimises ``mean(logloss) + lam * ||beta||_1`` with an unpenalised
intercept.  Each outer step forms the IRLS quadratic approximation and
solves it with cyclic soft-thresholding updates.  Paths are fitted from
large to small ``lam`` with warm starts.
"""

from __future__ import annotations

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..measures import check_binary

WEIGHT_FLOOR = 1e-5


@numba.njit(cache=True, nogil=True)
def _cd_sweep(X, w, xwx, resid, eta, beta, lam, active_only):
    n, p = X.shape
    change = 0.0
    for j in range(p):
        if xwx[j] <= 0.0 or (active_only and beta[j] == 0.0):
            continue
        old = beta[j]
        g = 0.0
        for i in range(n):
            g += w[i] * X[i, j] * resid[i]
        g = g / n + xwx[j] * old
        if g > lam:
            new = (g - lam) / xwx[j]
        elif g < -lam:
            new = (g + lam) / xwx[j]
        else:
            new = 0.0
        d = new - old
        if d != 0.0:
            beta[j] = new
            for i in range(n):
                resid[i] -= d * X[i, j]
                eta[i] += d * X[i, j]
            change = max(change, abs(d))
    return change


@numba.njit(cache=True, nogil=True)
def _intercept_step(w, resid, eta):
    sw = 0.0
    swr = 0.0
    for i in range(w.shape[0]):
        sw += w[i]
        swr += w[i] * resid[i]
    step = swr / sw
    if step != 0.0:
        for i in range(w.shape[0]):
            resid[i] -= step
            eta[i] += step
    return step


@numba.njit(cache=True, nogil=True)
def _cd_logistic(X, y, lam, beta, b0, tol, max_sweeps):
    n, p = X.shape
    eta = X @ beta + b0
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        prob = 1.0 / (1.0 + np.exp(-eta))
        w = np.maximum(prob * (1.0 - prob), WEIGHT_FLOOR)
        resid = (y - prob) / w  # working response minus eta
        xwx = np.empty(p)
        for j in range(p):
            s = 0.0
            for i in range(n):
                s += w[i] * X[i, j] * X[i, j]
            xwx[j] = s / n
        outer_change = 0.0
        # full sweeps alternate with sweeps over the current active set
        while sweeps < max_sweeps:
            sweeps += 1
            step = _intercept_step(w, resid, eta)
            b0 += step
            change = max(abs(step), _cd_sweep(X, w, xwx, resid, eta, beta, lam, False))
            outer_change = max(outer_change, change)
            if change < tol:
                break
            while sweeps < max_sweeps:
                sweeps += 1
                step = _intercept_step(w, resid, eta)
                b0 += step
                change = max(abs(step), _cd_sweep(X, w, xwx, resid, eta, beta, lam, True))
                if change < tol:
                    break
        if outer_change < tol:
            converged = True
            break
    return beta, b0, sweeps, converged


def _intercept_only(y):
    ybar = min(max(y.mean(), 1e-10), 1 - 1e-10)
    return np.log(ybar / (1 - ybar))


def lambda_max(X, y):
    """Smallest penalty with an all-zero coefficient vector.

    ``max_j |<x_j, y - mean(y)>| / n``, the KKT bound at the intercept-only fit.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(check_binary(y, "labels"), dtype=float)
    if y.min() == y.max():
        raise ValueError("labels are constant; the penalty path is undefined")
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / X.shape[0])


def lambda_grid(lam_max, size=100, floor_ratio=1e-3):
    """``size`` equidistant penalties on ``[0, lam_max]``; 0 becomes ``floor_ratio * lam_max``."""
    grid = np.linspace(0.0, lam_max, size)
    grid[0] = floor_ratio * lam_max
    return grid


def fit_path(X, y, lambdas, tol=1e-7, max_sweeps=10_000):
    """Fit the model for every penalty in ``lambdas`` (warm-started, largest first).

    Returns
    -------
    coef : ndarray of shape (len(lambdas), p)
    intercept : ndarray of shape (len(lambdas),)
    n_sweeps : ndarray of int
    converged : ndarray of bool
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    k = lambdas.size
    coef = np.zeros((k, X.shape[1]))
    intercept = np.zeros(k)
    sweeps = np.zeros(k, dtype=np.int64)
    converged = np.zeros(k, dtype=bool)
    beta = np.zeros(X.shape[1])
    b0 = _intercept_only(y)
    for idx in np.argsort(-lambdas, kind="stable"):
        beta, b0, sweeps[idx], converged[idx] = _cd_logistic(
            X, y, float(lambdas[idx]), beta.copy(), b0, tol, max_sweeps
        )
        coef[idx] = beta
        intercept[idx] = b0
    return coef, intercept, sweeps, converged


class L1LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression with an L1 penalty on the slopes.

    Parameters
    ----------
    lam : float
        Penalty weight on the mean log-loss scale.
    tol : float
        Convergence threshold on the largest coefficient change.
    max_sweeps : int
        Cap on coordinate-descent sweeps.
    """

    def __init__(self, lam=0.01, tol=1e-7, max_sweeps=10_000):
        self.lam = lam
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = check_binary(y, "labels")
        if y.min() == y.max():
            raise ValueError("both classes are required to fit")
        self.classes_ = np.array([0, 1])
        coef, intercept, sweeps, converged = fit_path(X, y, [self.lam], self.tol, self.max_sweeps)
        self._set(coef[0], intercept[0], sweeps[0], converged[0])
        return self

    def _set(self, coef, intercept, n_sweeps, converged):
        self.coef_ = coef
        self.intercept_ = float(intercept)
        self.n_iter_ = int(n_sweeps)
        self.converged_ = bool(converged)
        self.n_features_in_ = coef.shape[0]
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p1 = 1.0 / (1.0 + np.exp(-self.decision_function(X)))
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int8)


class LassoGridTrainer:
    """Trainer over a penalty grid: ``trainer(X, y, lam)`` or ``trainer.fit_grid(X, y, lams)``."""

    def __init__(self, tol=1e-7, max_sweeps=10_000):
        self.tol = tol
        self.max_sweeps = max_sweeps

    def __call__(self, X, y, lam):
        return L1LogisticRegression(lam, self.tol, self.max_sweeps).fit(X, y)

    def fit_grid(self, X, y, lambdas):
        X, y = check_X_y(X, y)
        coef, intercept, sweeps, converged = fit_path(X, y, lambdas, self.tol, self.max_sweeps)
        return [
            L1LogisticRegression(lam, self.tol, self.max_sweeps)._set(c, b, s, ok)
            for lam, c, b, s, ok in zip(lambdas, coef, intercept, sweeps, converged)
        ]


def train_model_grid(X, y, grid_size=100, trainer=None):
    """Fit ``grid_size`` models on equidistant penalties between 0 and ``lambda_max``."""
    trainer = trainer or LassoGridTrainer()
    return trainer.fit_grid(X, y, lambda_grid(lambda_max(X, y), grid_size))
