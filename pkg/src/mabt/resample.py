"""Seeded bootstrap resampling of evaluation indices.

Resamples are produced in fixed-size blocks, each with its own generator
keyed by ``(seed, block index)``.  Row ``b`` is therefore a function of
``(seed, b)`` alone and any number of workers yields the same table.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measures import MeasureKind, batch_accuracy, batch_auc, plugin_estimates

BLOCK_ROWS = 512
DEFAULT_B = {MeasureKind.ACCURACY: 10_000, MeasureKind.AUC: 2_000}


@dataclass(frozen=True)
class ResamplePlan:
    """Multiplicities of each observation in each of ``B`` resamples."""

    counts: np.ndarray
    seed: int | None

    @property
    def B(self):
        return self.counts.shape[0]

    @property
    def n(self):
        return self.counts.shape[1]


@dataclass(frozen=True)
class BootstrapEnsemble:
    """Bootstrap performance estimates, one row per resample, one column per model.

    ``n_degenerate`` counts AUC resamples that held a single class; their
    entries were replaced by the plug-in estimate.
    """

    theta_star: np.ndarray
    plan: ResamplePlan
    kind: MeasureKind
    plugin: np.ndarray
    n_degenerate: int = 0

    @property
    def B(self):
        return self.theta_star.shape[0]

    @property
    def m(self):
        return self.theta_star.shape[1]


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an integer in [0, 2**64)")
    return seed


def _block(seed, block, n):
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    idx = rng.integers(0, n, size=(BLOCK_ROWS, n))
    flat = idx + n * np.arange(BLOCK_ROWS)[:, None]
    return np.bincount(flat.ravel(), minlength=BLOCK_ROWS * n).reshape(BLOCK_ROWS, n)


def draw_resamples(n, B, seed=0, n_jobs=1):
    """Draw ``B`` uniform with-replacement resamples of ``n`` indices.

    Parameters
    ----------
    n : int
        Evaluation set size, at least 2.
    B : int
        Number of resamples.
    seed : int
        Master seed in ``[0, 2**64)``.
    n_jobs : int
        Worker threads; does not affect the result.

    Returns
    -------
    ResamplePlan
    """
    n, B = int(n), int(B)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if B < 1:
        raise ValueError(f"B must be positive, got {B}")
    seed = _check_seed(seed)
    n_blocks = -(-B // BLOCK_ROWS)
    if n_jobs > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            blocks = list(pool.map(lambda k: _block(seed, k, n), range(n_blocks)))
    else:
        blocks = [_block(seed, k, n) for k in range(n_blocks)]
    counts = np.concatenate(blocks)[:B]
    return ResamplePlan(counts=counts.astype(np.int64), seed=seed)


def enumerate_resamples(n):
    """Every ordered draw of ``n`` indices (``n**n`` rows).

    Averaging over these rows reproduces expectations under uniform
    resampling exactly, which makes it an exhaustive oracle for small ``n``.
    """
    if n < 1 or n > 6:
        raise ValueError("exhaustive enumeration is limited to 1 <= n <= 6")
    rows = [np.bincount(draw, minlength=n) for draw in itertools.product(range(n), repeat=n)]
    return ResamplePlan(counts=np.array(rows, dtype=np.int64), seed=None)


def bootstrap_performance(table, kind, plan, n_jobs=1):
    """Evaluate every model on every resample of ``plan``.

    Returns
    -------
    BootstrapEnsemble
    """
    kind = table.check_kind(kind)
    if plan.n != table.n:
        raise ValueError(f"plan is for n={plan.n}, table has n={table.n}")
    plugin = plugin_estimates(table, kind)
    batch = batch_accuracy if kind is MeasureKind.ACCURACY else batch_auc
    starts = range(0, plan.B, BLOCK_ROWS)

    def work(start):
        return batch(table.labels, table.predictions, plan.counts[start:start + BLOCK_ROWS])

    if n_jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    theta = np.concatenate(parts)
    bad = np.isnan(theta).any(axis=1)
    if bad.any():
        theta[bad] = plugin
    return BootstrapEnsemble(
        theta_star=theta, plan=plan, kind=kind, plugin=plugin, n_degenerate=int(bad.sum())
    )
