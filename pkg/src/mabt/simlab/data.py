"""Synthetic sparse-logistic data (scenario A)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROLES = ("train", "validation", "evaluation", "ground_truth")


@dataclass(frozen=True)
class Dataset:
    """Features and labels tagged with the pipeline stage they belong to."""

    X: np.ndarray
    y: np.ndarray
    role: str

    def __post_init__(self):
        if self.role not in ROLES + ("learning",):
            raise ValueError(f"unknown dataset role {self.role!r}")

    def __len__(self):
        return self.y.shape[0]


@dataclass(frozen=True)
class ScenarioAConfig:
    """Independent standard-normal features, sparse logistic signal.

    ``P(y = 1 | x) = invlogit(signal * sum of the first n_nonzero features)``.
    """

    n_total: int = 200
    p: int = 50
    n_nonzero: int = 10
    signal: float = 2.0
    fractions: tuple = field(default=(0.5, 0.25, 0.25))
    ground_truth_n: int = 10_000

    def __post_init__(self):
        if len(self.fractions) != 3 or abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError("split fractions must be three numbers summing to 1")
        if not 0 <= self.n_nonzero <= self.p:
            raise ValueError("n_nonzero must lie in [0, p]")
        if self.n_total < 8 or self.ground_truth_n < 1:
            raise ValueError("sample sizes too small")

    def split_sizes(self):
        n_train = int(round(self.fractions[0] * self.n_total))
        n_val = int(round(self.fractions[1] * self.n_total))
        return n_train, n_val, self.n_total - n_train - n_val

    @property
    def beta(self):
        b = np.zeros(self.p)
        b[: self.n_nonzero] = self.signal
        return b


def _draw(rng, n, beta, role):
    X = rng.standard_normal((n, beta.shape[0]))
    prob = 1.0 / (1.0 + np.exp(-(X @ beta)))
    y = (prob >= rng.random(n)).astype(np.int8)
    return Dataset(X=X, y=y, role=role)


def gen_scenario_a(config, seed=0):
    """Draw train, validation, evaluation and ground-truth sets from one law.

    ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    rng = np.random.default_rng(ss)
    beta = config.beta
    sizes = config.split_sizes() + (config.ground_truth_n,)
    return {role: _draw(rng, size, beta, role) for role, size in zip(ROLES, sizes)}


def learning_set(data):
    """Training and validation data combined, tagged ``learning``."""
    train, val = data["train"], data["validation"]
    return Dataset(X=np.vstack([train.X, val.X]), y=np.concatenate([train.y, val.y]), role="learning")
