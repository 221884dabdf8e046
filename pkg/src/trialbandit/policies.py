"""Arm-selection rules over a :class:`~trialbandit.core.BernoulliBandit`.

Greedy and Thompson break ties uniformly at random from the caller's stream.
UCB breaks ties on the lowest arm index, so given the bandit state it is fully
deterministic.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .core import BernoulliBandit

__all__ = [
    "PolicyKind",
    "select_random",
    "select_greedy",
    "select_thompson",
    "select_ucb",
    "select_arm",
    "ucb_indices",
]


class PolicyKind(str, enum.Enum):
    RANDOM = "random"
    GREEDY = "greedy"
    THOMPSON = "thompson"
    UCB = "ucb"

    @property
    def code(self) -> int:
        """Stable integer id, used to key random streams."""
        return _CODES[self]

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {value!r}; expected one of {choices}") from None


_CODES = {PolicyKind.RANDOM: 0, PolicyKind.GREEDY: 1, PolicyKind.THOMPSON: 2, PolicyKind.UCB: 3}


def _argmax_random_tie(values: list[float], rng: np.random.Generator) -> int:
    best = max(values)
    winners = [u for u, v in enumerate(values) if v == best]
    if len(winners) == 1:
        return winners[0]
    return winners[int(rng.integers(len(winners)))]


def select_random(k: int, rng: np.random.Generator) -> int:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return int(rng.integers(k))


def select_greedy(bandit: BernoulliBandit, rng: np.random.Generator) -> int:
    """Arm with the largest posterior mean."""
    return _argmax_random_tie(bandit.means, rng)


def select_thompson(bandit: BernoulliBandit, rng: np.random.Generator) -> int:
    """Draw one success probability per arm (in index order) and take the largest."""
    beta = rng.beta
    draws = [beta(p.alpha, p.beta) for p in bandit.arms]
    return _argmax_random_tie(draws, rng)


def ucb_indices(bandit: BernoulliBandit) -> list[float]:
    """Posterior mean plus ``sqrt(ln i / n_u)``, with ``i = t + 1``.

    Arms never pulled get an infinite index.
    """
    log_i = math.log(bandit.t + 1)
    out = []
    for p, n in zip(bandit.arms, bandit.pulls):
        if n == 0:
            out.append(math.inf)
        else:
            out.append(p.alpha / (p.alpha + p.beta) + math.sqrt(log_i / n))
    return out


def select_ucb(bandit: BernoulliBandit) -> int:
    """Round-robin over the first ``k`` allocations, then the largest UCB index."""
    if bandit.t < bandit.k:
        return bandit.t
    idx = ucb_indices(bandit)
    # list.index returns the first maximiser: lowest-index tie rule
    return idx.index(max(idx))


def select_arm(policy: PolicyKind, bandit: BernoulliBandit, rng: np.random.Generator) -> int:
    """Dispatch on ``policy``. UCB ignores ``rng``."""
    if policy is PolicyKind.THOMPSON:
        return select_thompson(bandit, rng)
    if policy is PolicyKind.UCB:
        return select_ucb(bandit)
    if policy is PolicyKind.RANDOM:
        return select_random(bandit.k, rng)
    if policy is PolicyKind.GREEDY:
        return select_greedy(bandit, rng)
    raise ValueError(f"unknown policy {policy!r}")
