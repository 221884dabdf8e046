"""Beta-Bernoulli bandit state.

Each arm carries an independent Beta(alpha, beta) belief over its success
probability, starting from the uniform prior (1, 1). A binary outcome on an
arm adds ``(outcome, 1 - outcome)`` to that arm's parameters.

Sampling uses :meth:`numpy.random.Generator.beta` one arm at a time. For a
fixed numpy version and bit generator this is bit-reproducible, and it yields
the same values as a vectorised call over the arms in index order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BetaParams",
    "BernoulliBandit",
    "new_bandit",
    "update",
    "posterior_mean",
    "sample_theta",
    "check_arm",
    "check_outcome",
]


@dataclass(frozen=True, slots=True)
class BetaParams:
    """Beta(alpha, beta) belief about one arm's success probability."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta parameters must be positive, got ({self.alpha}, {self.beta})")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def observe(self, outcome: int) -> "BetaParams":
        return BetaParams(self.alpha + outcome, self.beta + 1 - outcome)


@dataclass(slots=True)
class BernoulliBandit:
    """K arms of Beta beliefs, their pull counts and the local step counter ``t``.

    ``t`` counts allocations made by this bandit (sum of ``pulls``). In the
    contextual setting every per-context bandit keeps its own ``t``.
    """

    k: int
    arms: list[BetaParams] = field(default_factory=list)
    pulls: list[int] = field(default_factory=list)
    t: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"a bandit needs at least one arm, got k={self.k}")
        if not self.arms:
            self.arms = [BetaParams() for _ in range(self.k)]
        if not self.pulls:
            self.pulls = [0] * self.k
        if len(self.arms) != self.k or len(self.pulls) != self.k:
            raise ValueError("arms and pulls must both have length k")

    @property
    def means(self) -> list[float]:
        return [p.alpha / (p.alpha + p.beta) for p in self.arms]

    def copy(self) -> "BernoulliBandit":
        return BernoulliBandit(self.k, list(self.arms), list(self.pulls), self.t)


def new_bandit(k: int) -> BernoulliBandit:
    """Fresh bandit with every arm at the uniform prior."""
    k = int(k)
    if k < 1:
        raise ValueError(f"a bandit needs at least one arm, got k={k}")
    return BernoulliBandit(k)


def check_arm(arm, k: int) -> int:
    arm_i = int(arm)
    if arm_i != arm or not 0 <= arm_i < k:
        raise ValueError(f"arm {arm!r} out of range for k={k}")
    return arm_i


def check_outcome(outcome) -> int:
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    return int(outcome)


def update(bandit: BernoulliBandit, arm: int, outcome: int) -> BernoulliBandit:
    """Apply the conjugate update for ``outcome`` on ``arm``, in place.

    Returns the same bandit so calls can be chained.
    """
    arm = check_arm(arm, bandit.k)
    outcome = check_outcome(outcome)
    bandit.arms[arm] = bandit.arms[arm].observe(outcome)
    bandit.pulls[arm] += 1
    bandit.t += 1
    return bandit


def posterior_mean(params: BetaParams) -> float:
    return params.alpha / (params.alpha + params.beta)


def sample_theta(params: BetaParams, rng: np.random.Generator) -> float:
    """One draw from Beta(alpha, beta) using ``rng``."""
    return float(rng.beta(params.alpha, params.beta))
