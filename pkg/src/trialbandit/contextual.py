"""One independent Beta-Bernoulli bandit per binary context.

Contexts are ``D``-bit binary vectors, encoded little-endian into an index
``m = sum(bits[j] * 2**j)``. Per-context bandits are created on first use, so
unseen contexts cost nothing; an absent bandit behaves exactly like one sitting
at its priors. A single policy stream is shared across contexts and consumed
in arrival order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import BernoulliBandit, check_arm, check_outcome, update
from .policies import PolicyKind, select_arm

__all__ = ["MAX_CONTEXT_BITS", "Context", "context_index", "check_context", "ContextualBandit"]

MAX_CONTEXT_BITS = 20

Context = tuple[int, ...]


def check_context(x: Sequence[int], d: int | None = None) -> Context:
    bits = tuple(int(b) for b in x)
    if any(b not in (0, 1) for b in bits) or any(b != v for b, v in zip(bits, x)):
        raise ValueError(f"context must be binary, got {list(x)!r}")
    if d is not None and len(bits) != d:
        raise ValueError(f"context has {len(bits)} bits, expected {d}")
    return bits


def context_index(x: Sequence[int]) -> int:
    """Little-endian binary encoding: ``[1, 0] -> 1``, ``[0, 1] -> 2``, ``[] -> 0``."""
    m = 0
    for j, b in enumerate(x):
        if b:
            m |= 1 << j
    return m


@dataclass
class ContextualBandit:
    """Map from context index to an independent :class:`BernoulliBandit`."""

    d: int
    k: int
    table: dict[int, BernoulliBandit] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.d <= MAX_CONTEXT_BITS:
            raise ValueError(f"context dimension must be in [0, {MAX_CONTEXT_BITS}], got {self.d}")
        if self.k < 1:
            raise ValueError(f"a bandit needs at least one arm, got k={self.k}")

    def bandit_for(self, x: Sequence[int]) -> BernoulliBandit:
        """Bandit for context ``x``, created at its priors if absent."""
        m = context_index(check_context(x, self.d))
        return self.cell(m)

    def cell(self, m: int) -> BernoulliBandit:
        """Bandit for an already-encoded context index."""
        bandit = self.table.get(m)
        if bandit is None:
            bandit = self.table[m] = BernoulliBandit(self.k)
        return bandit

    def peek(self, x: Sequence[int]) -> BernoulliBandit:
        """Bandit for ``x`` without materialising it in the table."""
        m = context_index(check_context(x, self.d))
        return self.table.get(m) or BernoulliBandit(self.k)

    def select(self, x: Sequence[int], policy: PolicyKind, rng: np.random.Generator) -> int:
        return select_arm(PolicyKind.parse(policy), self.bandit_for(x), rng)

    def observe(self, x: Sequence[int], arm: int, outcome: int) -> "ContextualBandit":
        check_arm(arm, self.k)
        check_outcome(outcome)
        update(self.bandit_for(x), arm, outcome)
        return self
